"""Robustness of FM and MixFM to input noise."""

from typing import Dict

import click

from mixfm.core.database import load_checkpoint
from mixfm.core.errors import ValidationError
from mixfm.core.experiments import (
    DEFAULT_NOISE_LEVELS,
    METHODS,
    SWEEP_FIELDS,
    perturb_checkpoints,
    perturb_sweep,
)
from mixfm.core.model import FmParams
from mixfm.utils.config import FLOAT_LIST
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


def parse_checkpoints(specs) -> Dict[str, FmParams]:
    """``method=path`` pairs into loaded models."""
    models: Dict[str, FmParams] = {}
    for spec in specs:
        method, sep, path = spec.partition('=')
        if not sep or not path:
            raise ValidationError(f"checkpoint spec must be method=path, got '{spec}'")
        models[method], _ = load_checkpoint(path)
    return models


@click.command(name='perturb')
@data_options(require_test=True)
@train_options
@mix_options
@candidates_option
@experiment_options
@click.option('--noise-levels', type=FLOAT_LIST,
              default=','.join(f"{e:g}" for e in DEFAULT_NOISE_LEVELS), show_default=True,
              help='Noise size grid (epsilon)')
@click.option('-m', '--method', 'methods', type=click.Choice(list(METHODS)), multiple=True,
              help='Methods to train (default: fm, mixfm)')
@click.option('-c', '--checkpoint', 'checkpoints', multiple=True,
              help='method=path of a trained model; skips training (repeatable)')
@output_options
@click.pass_context
def perturb(ctx, train_path, valid_path, test_path, clamp, noise_levels, methods, checkpoints, **kwargs):
    """AUC reduction when test inputs get Uniform(-eps, eps) noise.

    Noise is added to nonzero features and clamped to [0, 1]. mean_auc is the
    perturbed AUC, delta the mean AUC reduction (0 at eps = 0). Methods see
    the same noise draws at each level.

    \b
    mixfm perturb --train train.libsvm --test test.libsvm --noise-levels 0,0.1,0.2
    mixfm perturb --train train.libsvm --test test.libsvm -c fm=fm.ckpt -c mixfm=mix.ckpt
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        cfg = build_experiment(kwargs, splits, noise_levels=tuple(noise_levels))
        logger.section(f"Perturbation at eps = {', '.join(f'{e:g}' for e in noise_levels)}")
        if checkpoints:
            models = parse_checkpoints(checkpoints)
            for method, params in models.items():
                if params.m != splits.train.dim:
                    raise ValidationError(f"checkpoint '{method}' has dimension {params.m}, "
                                          f"data has {splits.train.dim}")
            rows = perturb_checkpoints(models, splits.holdout, cfg.noise_levels, cfg.repeats, cfg.seed)
            results = []
        else:
            rows, results = perturb_sweep(splits, cfg, methods=tuple(methods) or ('fm', 'mixfm'),
                                          logger=logger)
        finish_experiment(rows, SWEEP_FIELDS, results, kwargs, logger)
