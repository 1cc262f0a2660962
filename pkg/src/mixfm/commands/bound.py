"""Generalization-gap reports for a trained model."""

from pathlib import Path

import click

from mixfm.core.database import load_checkpoint
from mixfm.core.sparse import read_dataset
from mixfm.core.theory import compare_bounds, gamma_of, interaction_energy, mixup_regularizer
from mixfm.core.seeding import SeedStreams
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.output import write_json


@click.command(name='bound')
@click.option('-c', '--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Model checkpoint')
@click.option('--data', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Training dataset the bounds refer to')
@click.option('--delta', type=float, default=0.05, show_default=True, help='Confidence parameter')
@click.option('--alpha', type=float, default=1.0, show_default=True,
              help='Beta shape alpha for the regularizer estimate')
@click.option('--beta', type=float, default=1.0, show_default=True,
              help='Beta shape beta for the regularizer estimate')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed of the Monte-Carlo estimate')
@click.option('--clamp', is_flag=True, help='Clip feature values above 1 in magnitude')
@click.option('-o', '--output', type=click.Path(dir_okay=False), help='Write bound.json here')
@click.pass_context
def bound(ctx, checkpoint, data, delta, alpha, beta, seed, clamp, output):
    """FM and MixFM generalization-gap reports plus the crossover verdict.

    gamma is the squared norm of the embeddings, tau and n come from the
    data. The verdict is mixfm-tighter when gamma reaches (1+e)^2/(e d).

    \b
    mixfm bound -c model.ckpt --data train.libsvm -o bound.json
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        params, _ = load_checkpoint(checkpoint)
        dataset = read_dataset(data, dim=params.m, clamp=clamp)
        comparison = compare_bounds(params, dataset, delta)
        payload = comparison.to_dict()
        payload['gamma'] = gamma_of(params)
        payload['interaction_energy'] = interaction_energy(params, dataset)
        payload['interaction_energy_centered'] = interaction_energy(params, dataset, centered=True)
        payload['mixup_regularizer'] = mixup_regularizer(
            params, dataset, alpha, beta, rng=SeedStreams(seed).fresh('moment'))
        write_json(payload, Path(output) if output else None)
        if output:
            logger.info(f"{comparison.verdict}: gamma {payload['gamma']:.4f}, "
                        f"threshold {comparison.threshold:.4f}")
