"""Generate a synthetic dataset with planted non-interactive pairs."""

import click

from mixfm.core.synth import SynthSpec, generate_synthetic, write_synthetic
from mixfm.utils.config import FLOAT_LIST
from mixfm.utils.logger import get_logger, handle_errors


@click.command(name='synth')
@click.option('-n', '--examples', 'n', type=int, default=5000, show_default=True,
              help='Natural examples before the split')
@click.option('--users', type=int, default=50, show_default=True)
@click.option('--items', type=int, default=50, show_default=True)
@click.option('--contexts', type=int, default=10, show_default=True)
@click.option('--truth-d', type=int, default=4, show_default=True, help='Embedding size of the truth model')
@click.option('--blocked-pairs', type=int, default=40, show_default=True,
              help='User-item pairs kept out of train and valid')
@click.option('--planted-per-pair', type=int, default=5, show_default=True,
              help='Test examples added per blocked pair')
@click.option('--split', 'ratios', type=FLOAT_LIST, default='0.8,0.1,0.1', show_default=True,
              help='train,valid,test ratios')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('-d', '--output-dir', type=click.Path(file_okay=False), required=True,
              help='Directory for train/valid/test.libsvm and truth.ckpt')
@click.pass_context
def synth(ctx, n, users, items, contexts, truth_d, blocked_pairs, planted_per_pair, ratios, seed, output_dir):
    """Write a user/item/context click dataset drawn from a random FM.

    Blocked user-item pairs never co-occur in train or valid; the test split
    gets extra examples of exactly those pairs. The blocked feature pairs are
    listed in each file header and in the truth checkpoint metadata.

    \b
    mixfm synth -d data/synth --blocked-pairs 40 --seed 7
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        spec = SynthSpec(n=n, users=users, items=items, contexts=contexts, truth_d=truth_d,
                         blocked_pairs=blocked_pairs, planted_per_pair=planted_per_pair,
                         ratios=tuple(ratios), seed=seed)
        result = generate_synthetic(spec, logger=logger)
        paths = write_synthetic(result, output_dir, logger=logger)
        logger.info(f"Wrote {len(result.train)}/{len(result.valid)}/{len(result.test)} "
                    f"train/valid/test examples (dim {spec.dim}) to {output_dir}")
        for name, path in paths.items():
            logger.verbose_info(f"   {name}: {path}")
