"""AUC and capacity against the embedding size, per method."""

import click

from mixfm.core.experiments import DEFAULT_EMBEDDING_SIZES, METHODS, SWEEP_FIELDS, sweep_embedding as run_sweep
from mixfm.utils.config import INT_LIST
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.options import (
    build_experiment,
    candidates_option,
    data_options,
    experiment_options,
    finish_experiment,
    load_splits,
    mix_options,
    output_options,
    train_options,
)


@click.command(name='sweep-embedding')
@data_options(require_test=True)
@train_options
@mix_options
@candidates_option
@experiment_options
@click.option('--embedding-sizes', type=INT_LIST,
              default=','.join(str(d) for d in DEFAULT_EMBEDDING_SIZES), show_default=True,
              help='Embedding size d grid')
@click.option('-m', '--method', 'methods', type=click.Choice(list(METHODS)), multiple=True,
              help='Methods to run (default: fm, mixfm, smfm)')
@output_options
@click.pass_context
def sweep_embedding(ctx, train_path, valid_path, test_path, clamp, embedding_sizes, methods, **kwargs):
    """Mean and sd test AUC plus mean gamma per (d, method).

    delta is the AUC difference to FM at the same d; mean_gamma is the
    squared embedding norm of the trained models.

    \b
    mixfm sweep-embedding --train train.libsvm --test test.libsvm \\
        --embedding-sizes 2,8,32,64 -o sweep.csv
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        grids = {'embedding_sizes': tuple(embedding_sizes)}
        if methods:
            grids['methods'] = tuple(methods)
        cfg = build_experiment(kwargs, splits, **grids)
        logger.section(f"Embedding sweep over d = {', '.join(str(d) for d in embedding_sizes)}")
        rows, results = run_sweep(splits, cfg, logger=logger)
        finish_experiment(rows, SWEEP_FIELDS + ['mean_gamma'], results, kwargs, logger)
