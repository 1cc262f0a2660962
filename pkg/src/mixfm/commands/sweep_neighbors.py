"""AUC of SMFM against the number of candidate neighbors."""

import click

from mixfm.core.experiments import DEFAULT_CANDIDATES, SWEEP_FIELDS, sweep_neighbors as run_sweep
from mixfm.utils.config import INT_LIST
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.options import (
    build_experiment,
    data_options,
    experiment_options,
    finish_experiment,
    load_splits,
    mix_options,
    output_options,
    train_options,
)


@click.command(name='sweep-neighbors')
@data_options(require_test=True)
@train_options
@mix_options
@experiment_options
@click.option('--candidates', type=INT_LIST, default=','.join(str(p) for p in DEFAULT_CANDIDATES),
              show_default=True, help='Candidate count p grid')
@output_options
@click.pass_context
def sweep_neighbors(ctx, train_path, valid_path, test_path, clamp, candidates, **kwargs):
    """Mean and sd test AUC of SMFM for each candidate count p.

    delta is measured against p = 1, which is plain MixFM.

    \b
    mixfm sweep-neighbors --train train.libsvm --test test.libsvm \\
        --candidates 1,2,5,10 -o sweep.csv
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        cfg = build_experiment(kwargs, splits, mode='saliency', p=1, candidates=tuple(candidates))
        logger.section(f"Neighbor sweep over p = {', '.join(str(p) for p in candidates)}")
        rows, results = run_sweep(splits, cfg, logger=logger)
        finish_experiment(rows, SWEEP_FIELDS, results, kwargs, logger)
