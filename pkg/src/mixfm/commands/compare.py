"""Paired A/B comparison of FM, CopyFM, MixFM and SMFM."""

import click

from mixfm.core.experiments import COMPARE_FIELDS, COMPARE_METHODS, METHODS, compare_methods
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


@click.command(name='compare')
@data_options(require_test=True)
@train_options
@mix_options
@candidates_option
@experiment_options
@click.option('-m', '--method', 'methods', type=click.Choice(list(METHODS)), multiple=True,
              help='Methods to compare (default: all four)')
@output_options
@click.pass_context
def compare(ctx, train_path, valid_path, test_path, clamp, methods, **kwargs):
    """Train every method on the same seeds and test each against FM.

    Repeat r of every method shares its initialization and shuffling
    seeds, so the paired t-test compares like with like.

    OUTPUT FIELDS:

    \b
    method        fm, copyfm, mixfm or smfm
    mean_auc      Mean test AUC over the repeats
    sd_auc        Its standard deviation
    mean_logloss  Mean test LogLoss
    sd_logloss    Its standard deviation
    delta         mean_auc minus FM's mean_auc
    t_statistic   Paired t statistic against FM
    pvalue        Two-sided p-value
    verdict       significant, not-significant, identical or constant-shift

    \b
    mixfm compare --train train.libsvm --test test.libsvm --repeats 10 -o compare.csv
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        cfg = build_experiment(kwargs, splits)
        chosen = tuple(methods) or COMPARE_METHODS
        logger.section(f"Comparing {', '.join(chosen)} over {cfg.repeats} seeds")
        rows, results = compare_methods(splits, cfg, methods=chosen, logger=logger)
        finish_experiment(rows, COMPARE_FIELDS, results, kwargs, logger)
