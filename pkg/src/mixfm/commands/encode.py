"""Encode tabular records into sparse text datasets."""

from pathlib import Path
from typing import Dict

import click

from mixfm.core.encoding import (
    KINDS,
    build_schema,
    encode_records,
    fit_schema,
    format_schema,
    load_schema,
    read_records,
)
from mixfm.core.errors import ValidationError
from mixfm.core.sampling import negative_sample, split_dataset
from mixfm.core.seeding import SeedStreams
from mixfm.core.sparse import write_dataset
from mixfm.utils.config import FLOAT_LIST
from mixfm.utils.logger import get_logger, handle_errors


def parse_columns(specs) -> Dict[str, str]:
    """``name:kind`` pairs into an ordered mapping."""
    kinds: Dict[str, str] = {}
    for spec in specs:
        name, sep, kind = spec.partition(':')
        if not sep or kind not in KINDS:
            raise ValidationError(f"column spec must be name:{'|'.join(KINDS)}, got '{spec}'")
        kinds[name] = kind
    return kinds


@click.command(name='encode')
@click.option('-i', '--input', 'input_path', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Delimited records with a header row')
@click.option('-s', '--schema', type=click.Path(exists=True, dir_okay=False),
              help='Schema file: one "name kind [vocab-file|min,max]" per line')
@click.option('--column', 'columns', multiple=True,
              help='name:kind column spec when no schema file is given (repeatable)')
@click.option('--label', 'label_column', default='label', show_default=True,
              help='Label column (ignored with --negatives)')
@click.option('--delimiter', default=',', show_default=True, help='Field delimiter')
@click.option('--clamp', is_flag=True, help='Clamp numeric values to the schema bounds')
@click.option('--oov', is_flag=True, help='Reserve an index for unseen categories')
@click.option('--negatives', type=int, help='Treat records as positives and add K negatives each')
@click.option('--item-column', help='Column whose values negatives are drawn from')
@click.option('--user-column', help='Column identifying the user (default: every non-item column)')
@click.option('--split', 'ratios', type=FLOAT_LIST, default='0.8,0.1,0.1', show_default=True,
              help='train,valid,test ratios')
@click.option('--no-split', is_flag=True, help='Write a single data.libsvm')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('-d', '--output-dir', type=click.Path(file_okay=False), required=True,
              help='Directory for the .libsvm files and schema.txt')
@click.pass_context
def encode(ctx, input_path, schema, columns, label_column, delimiter, clamp, oov, negatives,
           item_column, user_column, ratios, no_split, seed, output_dir):
    """One-hot/multi-hot/numeric encoding of records.

    Columns are laid out in schema order; schema.txt lists each column's
    index range. With --negatives every record is an observed interaction
    and K items the user never touched are added with label 0. Give
    --user-column when the records also carry context columns.

    \b
    mixfm encode -i ratings.csv --column user:onehot --column item:onehot \\
        --column tags:multihot --negatives 2 --item-column item -d data/
    """
    logger = get_logger(ctx.obj.get('verbose', False))
    with handle_errors(logger):
        rows = read_records(input_path, delimiter=delimiter)
        if schema:
            encoding = fit_schema(load_schema(schema, oov=oov), rows)
        elif columns:
            encoding = build_schema(rows, parse_columns(columns), oov=oov)
        else:
            raise ValidationError("give --schema or at least one --column")

        streams = SeedStreams(seed)
        if negatives is not None:
            if not item_column:
                raise ValidationError("--negatives needs --item-column")
            positives = encode_records(rows, encoding, label_column=None, clamp=clamp, logger=logger)
            user_range = encoding.feature_range(user_column) if user_column else None
            dataset = negative_sample(positives, encoding.feature_range(item_column), negatives,
                                      streams.fresh('negatives'), user_range=user_range, logger=logger)
        else:
            dataset = encode_records(rows, encoding, label_column=label_column, clamp=clamp, logger=logger)

        out_dir = Path(output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / 'schema.txt').write_text(format_schema(encoding), encoding='utf-8')
        if no_split:
            write_dataset(dataset, out_dir / 'data.libsvm')
            logger.info(f"Wrote {len(dataset)} examples (dim {dataset.dim}) to {out_dir / 'data.libsvm'}")
            return
        parts = split_dataset(dataset, ratios, streams.fresh('split'))
        for name, part in zip(('train', 'valid', 'test'), parts):
            write_dataset(part, out_dir / f"{name}.libsvm")
        logger.info(f"Wrote {'/'.join(str(len(p)) for p in parts)} train/valid/test examples "
                    f"(dim {dataset.dim}) to {out_dir}")
