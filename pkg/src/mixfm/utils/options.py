"""Click options shared by the training and experiment commands."""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click

from mixfm.core.augment import MODES, MixConfig, mix_ratio_to_n_prime
from mixfm.core.database import record_runs
from mixfm.core.experiments import ExperimentConfig, Splits, TrialResult
from mixfm.core.sparse import Dataset, read_dataset
from mixfm.core.training import TrainConfig
from mixfm.utils.logger import Logger
from mixfm.utils.output import OUTPUT_FORMATS, determine_format, write_output


def _apply(options) -> Callable:
    def decorator(f):
        for option in reversed(options):
            f = option(f)
        return f
    return decorator


def data_options(require_test: bool = False) -> Callable:
    return _apply([
        click.option('--train', 'train_path', type=click.Path(exists=True, dir_okay=False), required=True,
                     help='Training data (sparse text)'),
        click.option('--valid', 'valid_path', type=click.Path(exists=True, dir_okay=False),
                     help='Validation data'),
        click.option('--test', 'test_path', type=click.Path(exists=True, dir_okay=False),
                     required=require_test, help='Test data'),
        click.option('--clamp', is_flag=True, help='Clip feature values above 1 in magnitude'),
    ])


def train_options(f):
    return _apply([
        click.option('--epochs', type=int, default=30, show_default=True, help='Training epochs T'),
        click.option('--batch-size', type=int, default=256, show_default=True, help='Minibatch size'),
        click.option('--learning-rate', type=float, default=0.01, show_default=True, help='Adam learning rate'),
        click.option('--embedding-size', type=int, default=8, show_default=True, help='Embedding size d'),
        click.option('--l2', type=float, default=0.0, show_default=True, help='Weight decay on w and V'),
        click.option('--init-std', type=float, default=0.01, show_default=True, help='Std of initial V'),
        click.option('--seed', type=int, default=0, show_default=True, help='Master random seed'),
    ])(f)


def mix_options(f):
    return _apply([
        click.option('--alpha', type=float, default=1.0, show_default=True, help='Beta shape alpha'),
        click.option('--beta', type=float, default=1.0, show_default=True, help='Beta shape beta'),
        click.option('--mix-ratio', type=float, default=1.0, show_default=True,
                     help="Generated samples per natural sample (n'/n)"),
        click.option('--absolute-saliency', is_flag=True, help='Select candidates by |saliency|'),
    ])(f)


def candidates_option(f):
    return click.option('--candidates', type=int, default=10, show_default=True,
                        help='Candidate neighbors p per sample (saliency mode)')(f)


def output_options(f):
    return _apply([
        click.option('-o', '--output', type=click.Path(dir_okay=False), help='Write results to file'),
        click.option('--output-format', 'output_format', type=click.Choice(OUTPUT_FORMATS),
                     help='Output format (default: from file extension)'),
    ])(f)


def experiment_options(f):
    return _apply([
        click.option('--repeats', type=int, default=10, show_default=True, help='Seeds per grid point (R)'),
        click.option('--jobs', type=int, default=1, show_default=True, help='Parallel worker processes'),
        click.option('--db', type=click.Path(dir_okay=False), help='Record every trial in this run store'),
    ])(f)


def train_config(kwargs: Dict[str, Any]) -> TrainConfig:
    return TrainConfig(
        epochs=kwargs['epochs'],
        batch_size=kwargs['batch_size'],
        learning_rate=kwargs['learning_rate'],
        embedding_size=kwargs['embedding_size'],
        seed=kwargs['seed'],
        l2=kwargs['l2'],
        init_std=kwargs['init_std'],
    )


def mix_config(kwargs: Dict[str, Any], n: int, mode: str = 'mix', p: Optional[int] = None) -> MixConfig:
    if mode not in MODES:
        raise click.BadParameter(f"unknown mode '{mode}'")
    return MixConfig(
        alpha=kwargs['alpha'],
        beta=kwargs['beta'],
        n_prime=mix_ratio_to_n_prime(kwargs['mix_ratio'], n),
        p=p if p is not None else kwargs.get('candidates', 1),
        mode=mode,
        absolute_saliency=kwargs['absolute_saliency'],
    )


def load_splits(train_path: str, valid_path: Optional[str], test_path: Optional[str],
                clamp: bool = False) -> Splits:
    """Read train (dimension from its header) and the optional holdout splits."""
    train = read_dataset(Path(train_path), clamp=clamp)

    def _holdout(path: Optional[str]) -> Optional[Dataset]:
        return read_dataset(Path(path), dim=train.dim, clamp=clamp) if path else None

    return Splits(train, _holdout(valid_path), _holdout(test_path))


def build_experiment(kwargs: Dict[str, Any], splits: Splits, mode: str = 'mix', **grids) -> ExperimentConfig:
    """ExperimentConfig from the shared train/mix/experiment options."""
    return ExperimentConfig(
        train=train_config(kwargs),
        mix=mix_config(kwargs, len(splits.train), mode=mode, p=grids.pop('p', None)),
        repeats=kwargs['repeats'],
        seed=kwargs['seed'],
        jobs=kwargs['jobs'],
        **grids,
    )


def finish_experiment(rows: List[Dict[str, Any]], fields: List[str], results: List[TrialResult],
                      kwargs: Dict[str, Any], logger: Logger) -> None:
    """Write the summary rows and, with --db, every trial."""
    output_path = Path(kwargs['output']) if kwargs.get('output') else None
    format_name = determine_format(kwargs.get('output_format'), output_path)
    if output_path is None and not kwargs.get('output_format'):
        format_name = 'table'
    write_output(format_name, fields, rows, output_path)
    if kwargs.get('db'):
        count = record_runs(kwargs['db'], [r.run_row() for r in results])
        logger.verbose_info(f"   recorded {count} trials in {kwargs['db']}")
    if output_path:
        logger.info(f"Wrote {len(rows)} rows to {output_path}")
