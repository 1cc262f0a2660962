"""AUC of MixFM against the number of mixed samples."""

import click

from mixfm.core.experiments import DEFAULT_RATIOS, SWEEP_FIELDS, sweep_ratio as run_sweep
from mixfm.utils.config import FLOAT_LIST
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


@click.command(name='sweep-ratio')
@data_options(require_test=True)
@train_options
@mix_options
@experiment_options
@click.option('--ratios', type=FLOAT_LIST, default=','.join(f"{r:g}" for r in DEFAULT_RATIOS),
              show_default=True, help="n'/n grid")
@output_options
@click.pass_context
def sweep_ratio(ctx, train_path, valid_path, test_path, clamp, ratios, **kwargs):
    """Mean and sd test AUC of MixFM for each n'/n ratio.

    Each ratio trains --repeats seeds; delta is the mean AUC change against
    ratio 0 (plain FM), so the ratio-0 row has delta 0.

    \b
    mixfm sweep-ratio --train train.libsvm --test test.libsvm \\
        --ratios 0,0.25,0.5,1,2 --repeats 10 -o sweep.csv
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        cfg = build_experiment(kwargs, splits, mode='mix', ratios=tuple(ratios))
        logger.section(f"Ratio sweep over {', '.join(f'{r:g}' for r in ratios)}")
        rows, results = run_sweep(splits, cfg, logger=logger)
        finish_experiment(rows, SWEEP_FIELDS, results, kwargs, logger)
