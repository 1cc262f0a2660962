"""Train an FM (plain, CopyFM, MixFM or SMFM) and write learning curves plus a checkpoint."""

from pathlib import Path

import click

from mixfm.core.augment import MODES, train_augmented
from mixfm.core.database import save_checkpoint
from mixfm.core.seeding import SeedStreams
from mixfm.core.theory import gamma_of
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.options import (
    candidates_option,
    data_options,
    load_splits,
    mix_config,
    mix_options,
    train_config,
    train_options,
)
from mixfm.utils.output import write_output


CURVE_FIELDS = ['epoch', 'split', 'auc', 'logloss', 'seconds']


@click.command(name='train')
@data_options()
@train_options
@mix_options
@candidates_option
@click.option('--mode', type=click.Choice(MODES), default='mix', show_default=True,
              help='Augmentation: none (FM), copy (CopyFM), mix (MixFM), saliency (SMFM)')
@click.option('-d', '--output-dir', type=click.Path(file_okay=False), default='.', show_default=True,
              help='Directory for curves.csv and model.ckpt')
@click.option('--checkpoint', type=click.Path(dir_okay=False),
              help='Checkpoint path (default: <output-dir>/model.ckpt)')
@click.pass_context
def train(ctx, train_path, valid_path, test_path, clamp, mode, output_dir, checkpoint, **kwargs):
    """Train on D plus a fresh augmentation set every epoch.

    Writes one curves.csv row per epoch and split (train, valid, test) and
    the final parameters as a checkpoint.

    OUTPUT:

    \b
    curves.csv   epoch,split,auc,logloss,seconds
    model.ckpt   SQLite checkpoint (load with evaluate, bound, augment)

    EXAMPLES:

    \b
    # Plain FM baseline
    mixfm train --train train.libsvm --test test.libsvm --mode none -d runs/fm
    # SMFM with 10 candidates per sample
    mixfm train --train train.libsvm --test test.libsvm --mode saliency --candidates 10
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        splits = load_splits(train_path, valid_path, test_path, clamp)
        cfg = train_config(kwargs)
        mix = mix_config(kwargs, len(splits.train), mode=mode)

        logger.section(f"Training ({mode}) on {len(splits.train)} examples, dim {splits.train.dim}")
        params, history = train_augmented(splits.train, cfg, mix, streams=SeedStreams(cfg.seed),
                                          valid=splits.valid, test=splits.test, logger=logger)

        out_dir = Path(output_dir)
        curves = out_dir / 'curves.csv'
        write_output('csv', CURVE_FIELDS, [r.to_dict() for r in history], curves)

        checkpoint_path = Path(checkpoint) if checkpoint else out_dir / 'model.ckpt'
        save_checkpoint(checkpoint_path, params, {
            'mode': mode,
            'seed': cfg.seed,
            'epochs': cfg.epochs,
            'embedding_size': cfg.embedding_size,
        }, logger=logger)

        last = history[-1]
        logger.info(f"Trained {cfg.epochs} epochs: {last.split} AUC {last.auc:.4f}, "
                    f"LogLoss {last.logloss:.4f}, gamma {gamma_of(params):.4f}")
        logger.info(f"   curves: {curves}")
        logger.info(f"   checkpoint: {checkpoint_path}")
