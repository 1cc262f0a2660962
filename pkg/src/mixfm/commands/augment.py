"""Dump one epoch's augmentation set for inspection."""

import click

from mixfm.core.augment import MixConfig, build_augmentation, mix_ratio_to_n_prime
from mixfm.core.database import load_checkpoint
from mixfm.core.errors import ValidationError
from mixfm.core.seeding import SeedStreams
from mixfm.core.sparse import format_dataset, read_dataset, write_dataset
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.options import candidates_option, mix_options


@click.command(name='augment')
@click.option('--data', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Natural dataset (sparse text)')
@click.option('--mode', type=click.Choice(['mix', 'saliency', 'copy']), default='mix', show_default=True,
              help='Augmentation to generate')
@click.option('-c', '--checkpoint', type=click.Path(exists=True, dir_okay=False),
              help='Model checkpoint scoring saliency (required for --mode saliency)')
@mix_options
@candidates_option
@click.option('--seed', type=int, default=0, show_default=True, help='Master random seed')
@click.option('--clamp', is_flag=True, help='Clip feature values above 1 in magnitude')
@click.option('-o', '--output', type=click.Path(dir_okay=False), help='Write to file (default: stdout)')
@click.pass_context
def augment(ctx, data, mode, checkpoint, seed, clamp, output, **kwargs):
    """Generate D~ once and write it as sparse text with a #mixed header.

    Uses the same mixing stream as the first training epoch of `train`
    with the same seed.

    \b
    mixfm augment --data train.libsvm --mix-ratio 0.5 -o mixed.libsvm
    mixfm augment --data train.libsvm --mode saliency -c model.ckpt --candidates 10
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        dataset = read_dataset(data, clamp=clamp)
        params = None
        if checkpoint:
            params, _ = load_checkpoint(checkpoint)
            if params.m != dataset.dim:
                raise ValidationError(f"checkpoint dimension {params.m} does not match data dimension {dataset.dim}")
        if mode == 'saliency' and params is None:
            raise ValidationError("--mode saliency needs --checkpoint")

        mix = MixConfig(alpha=kwargs['alpha'], beta=kwargs['beta'],
                        n_prime=mix_ratio_to_n_prime(kwargs['mix_ratio'], len(dataset)),
                        p=kwargs['candidates'], mode=mode,
                        absolute_saliency=kwargs['absolute_saliency'])
        augmented = build_augmentation(dataset, mix, SeedStreams(seed).fresh('mixing'), params)

        comments = [f"mixed mode={mode} alpha={mix.alpha:g} beta={mix.beta:g} "
                    f"n_prime={len(augmented)} p={mix.p} seed={seed}"]
        if output:
            write_dataset(augmented, output, comments=comments)
            logger.info(f"Wrote {len(augmented)} {mode} examples to {output}")
        else:
            click.echo(format_dataset(augmented, comments), nl=False)
