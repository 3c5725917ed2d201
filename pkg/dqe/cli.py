#!/usr/bin/env python3

"""
DQE command line - synth, train, infer, eval, curate and sweep

Configuration precedence: built-in defaults, then --config JSON, then flags.
Exit codes: 0 success, 1 pipeline error, 2 usage error (including a checkpoint
trained with different preprocessing than the run asks for).
"""

import argparse
import sys
from typing import Dict, List, Optional

from . import __version__
from .controllers import CONTROLLERS
from .services.config_service import apply_overrides, load_config
from .services.exceptions import ConfigMismatchError, DQEError
from .services.logger import Logger, configure_logging
from .services.models.volume_models import LabelEncoding, Normalization
from .services.report_service import to_json

log = Logger('cli')


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

COMMAND_HELP = {
    'synth': 'generate a synthetic phantom dataset with proxy ratings',
    'train': 'train a quality regressor and evaluate it on held-out exams',
    'infer': 'predict star ratings for every candidate segmentation',
    'eval': 'compare predictions with ratings or ground-truth segmentations',
    'curate': 'keep or reject segmentations by thresholding predicted stars',
    'sweep': 'train and evaluate a grid of architectures and preprocessing choices',
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='JSON run configuration')
    common.add_argument('--seed', type=int, help='seed for splitting, training and synthesis')
    common.add_argument('--out', dest='out_dir', metavar='DIR', help='output directory')
    common.add_argument('--data-root', dest='data_root', metavar='DIR', help='dataset root directory')
    common.add_argument('--ratings', dest='ratings_csv', metavar='PATH', help='ratings CSV')
    common.add_argument('--checkpoint', metavar='PATH', help='model checkpoint')
    common.add_argument('--predictions', dest='predictions_csv', metavar='PATH', help='predictions CSV')
    common.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--no-progress', action='store_true', help='hide progress bars')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dqe', description='Deep quality estimation for brain-tumor segmentations')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    common = _common_parser()

    parsers = {name: subparsers.add_parser(name, parents=[common], help=text) for name, text in COMMAND_HELP.items()}

    parsers['synth'].add_argument('--n-exams', dest='n_exams', type=int, help='number of phantom exams')

    for name in ('train', 'sweep'):
        parsers[name].add_argument('--epochs', type=int, help='training epochs')
        parsers[name].add_argument('--batch-size', dest='batch_size', type=int, help='mini-batch size')

    for name in ('train', 'sweep', 'eval'):
        parsers[name].add_argument('--plot', action='store_true', default=None,
                                   help='render scatter and Bland-Altman PNGs')

    for name in ('train', 'infer', 'curate'):
        parsers[name].add_argument('--normalization', choices=[n.value for n in Normalization],
                                   help='MR intensity normalization')
        parsers[name].add_argument('--encoding', choices=[e.value for e in LabelEncoding],
                                   help='label channel encoding')

    parsers['curate'].add_argument('--threshold', type=float, help='minimum mean stars to keep a segmentation')

    parsers['eval'].add_argument('--mode', dest='eval_mode', choices=['ratings', 'seg'],
                                 help='reference type: human ratings or ground-truth segmentations')
    parsers['eval'].add_argument('--tolerance-mm', dest='tolerance_mm', type=float,
                                 help='surface Dice tolerance in millimeters')
    return parser


_OVERRIDE_FLAGS = (
    'seed', 'out_dir', 'data_root', 'ratings_csv', 'checkpoint', 'predictions_csv',
    'n_exams', 'epochs', 'batch_size', 'normalization', 'encoding', 'plot', 'threshold', 'eval_mode',
    'tolerance_mm',
)


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    return {name: getattr(args, name) for name in _OVERRIDE_FLAGS if getattr(args, name, None) is not None}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level)
    try:
        config = apply_overrides(load_config(args.config), _overrides(args))
        controller = CONTROLLERS[args.command](config, progress=not args.no_progress)
        result = controller.run()
    except ConfigMismatchError as e:
        log.log_error(f"{args.command} failed: {e}")
        return EXIT_USAGE
    except DQEError as e:
        log.log_error(f"{args.command} failed: {e}")
        return EXIT_ERROR

    sys.stdout.write(to_json(result))
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
