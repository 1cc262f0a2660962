"""Evaluate a checkpoint on a dataset."""

from pathlib import Path

import click

from mixfm.core.database import load_checkpoint
from mixfm.core.metrics import evaluate as evaluate_model
from mixfm.core.sparse import read_dataset
from mixfm.utils.logger import get_logger, handle_errors
from mixfm.utils.options import output_options
from mixfm.utils.output import determine_format, write_output


REPORT_FIELDS = ['auc', 'logloss', 'n_examples', 'n_positive']


@click.command(name='evaluate')
@click.option('-c', '--checkpoint', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Model checkpoint')
@click.option('--data', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Dataset (sparse text)')
@click.option('--clamp', is_flag=True, help='Clip feature values above 1 in magnitude')
@output_options
@click.pass_context
def evaluate(ctx, checkpoint, data, clamp, output, output_format):
    """Report AUC and LogLoss of a checkpoint on a dataset.

    AUC is left empty when the dataset holds a single class.

    \b
    mixfm evaluate -c model.ckpt --data test.libsvm
    mixfm evaluate -c model.ckpt --data test.libsvm --output-format json
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        params, _ = load_checkpoint(checkpoint)
        dataset = read_dataset(data, dim=params.m, clamp=clamp)
        report = evaluate_model(params, dataset)
        output_path = Path(output) if output else None
        write_output(determine_format(output_format, output_path), REPORT_FIELDS,
                     [report.to_dict()], output_path)
