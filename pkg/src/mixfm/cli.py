"""Main CLI entry point for mixfm."""

import click

from mixfm import __version__
from mixfm.commands.augment import augment
from mixfm.commands.bound import bound
from mixfm.commands.compare import compare
from mixfm.commands.encode import encode
from mixfm.commands.evaluate import evaluate
from mixfm.commands.perturb import perturb
from mixfm.commands.sweep_embedding import sweep_embedding
from mixfm.commands.sweep_neighbors import sweep_neighbors
from mixfm.commands.sweep_ratio import sweep_ratio
from mixfm.commands.synth import synth
from mixfm.commands.train import train
from mixfm.utils.config import build_default_map, load_config
from mixfm.utils.logger import get_logger, handle_errors


@click.group()
@click.version_option(version=__version__, prog_name='mixfm')
@click.option('-v', '--verbose', is_flag=True, help='Verbose output')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
              help='key = value file supplying option defaults')
@click.pass_context
def cli(ctx, verbose, config_path):
    """Factorization machines with mixed-sample augmentation.

    TYPICAL WORKFLOW:

    \b
    1. DATA: Encode records or generate a synthetic set
       mixfm encode -i ratings.csv --column user:onehot --column item:onehot -d data/
       mixfm synth -d data/synth --blocked-pairs 40
    2. TRAIN: Fit FM, CopyFM, MixFM or SMFM
       mixfm train --train data/train.libsvm --test data/test.libsvm --mode mix -d runs/mix
    3. INSPECT: Evaluate, bound, or dump an augmentation set
       mixfm evaluate -c runs/mix/model.ckpt --data data/test.libsvm
       mixfm bound -c runs/mix/model.ckpt --data data/train.libsvm
    4. EXPERIMENT: Repeated-seed sweeps and A/B comparison
       mixfm compare --train data/train.libsvm --test data/test.libsvm --repeats 10

    COMMAND GROUPS:

    \b
    Data:
      encode           Encode delimited records as sparse text
      synth            Synthetic data with planted non-interactive pairs
      augment          Write one epoch's augmentation set
    Models:
      train            Train and write curves.csv plus a checkpoint
      evaluate         AUC and LogLoss of a checkpoint
      bound            FM vs MixFM generalization-gap report
    Experiments:
      sweep-ratio      AUC against n'/n
      sweep-neighbors  SMFM AUC against the candidate count p
      sweep-embedding  AUC and gamma against the embedding size d
      perturb          AUC reduction under input noise
      compare          Paired t-test of every method against FM

    CONFIG FILES:

    \b
    --config reads "key = value" lines; keys are option names
    (dashes or underscores) and become defaults for every command
    that accepts them. Explicit command-line options still win.

    Use -v/--verbose for detailed progress output.
    """
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    if config_path:
        logger = get_logger(verbose)
        with handle_errors(logger):
            default_map, unknown = build_default_map(cli, load_config(config_path))
        for key in unknown:
            logger.warning(f"config key '{key}' is not an option of any command")
        ctx.default_map = default_map


# Register commands
cli.add_command(augment)
cli.add_command(bound)
cli.add_command(compare)
cli.add_command(encode)
cli.add_command(evaluate)
cli.add_command(perturb)
cli.add_command(sweep_embedding)
cli.add_command(sweep_neighbors)
cli.add_command(sweep_ratio)
cli.add_command(synth)
cli.add_command(train)


if __name__ == '__main__':
    cli()
