# cli_app/main.py

"""
Точка входа CLI

Пример:
    python app.py pdf --model pd --alpha 0.5 --theta 1 --n 10 --k 3
    python app.py verify --suite all --tol ks=0.2
"""

import argparse
import json
import logging
import sys
import time

from stable_core.errors import ConfigError, DomainError, GibbsDivError, VerificationFailure

from .commands import COMMANDS
from .config import MODEL_KINDS, SUITES, RunConfig, load_environment
from .output import create_run_dir, setup_logging, status, write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFICATION = 4


def _add_common(parser):
    parser.add_argument("--model", choices=MODEL_KINDS, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--tilt-file", dest="tilt_file", default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--m", type=int, default=None)
    parser.add_argument("--reps", type=int, default=None)
    parser.add_argument("--grid", default=None, help="lo:hi:points[:log]")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--tol", action="append", default=None, metavar="KEY=VALUE")
    parser.add_argument("--manifest", default=None, help="manifest.yaml прошлого запуска")
    parser.add_argument("--nmax", type=int, default=None)
    parser.add_argument("--order", type=int, default=None)
    parser.add_argument("--t", type=float, default=None)
    parser.add_argument("--suite", choices=SUITES, default=None)
    parser.add_argument("--method", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gibbsdiv",
        description="Условное α-разнообразие гиббсовских разбиений",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "pdf": "сетка плотности разнообразия",
        "weights": "таблица весов V_{n,k}",
        "simulate": "Монте-Карло ансамбль K_m/m^α",
        "moments": "моменты и характеристическая функция",
        "verify": "наборы проверок инвариантов",
    }
    for name, text in helps.items():
        _add_common(subparsers.add_parser(name, help=text))
    return parser


def _exit_code(error):
    if isinstance(error, (ConfigError, DomainError)):
        return EXIT_CONFIG
    if isinstance(error, VerificationFailure):
        return EXIT_VERIFICATION
    return EXIT_NUMERIC


def _report_error(error):
    print(json.dumps(error.to_dict(), ensure_ascii=False, default=str), file=sys.stderr)


def main(argv=None):
    """
    Запуск подкоманды

    Returns:
        int: код выхода (0, 2 конфигурация, 3 численная ошибка, 4 проверка)
    """
    load_environment()
    args = build_parser().parse_args(argv)

    try:
        config = RunConfig.from_args(args).validate()
    except GibbsDivError as e:
        setup_logging(None, args.verbose)
        _report_error(e)
        return _exit_code(e)

    run_dir = create_run_dir(config.out)
    setup_logging(run_dir, args.verbose)
    logger.info("📥 %s: %s", config.command, run_dir)

    started = time.perf_counter()
    outputs, code, outcome = [], EXIT_OK, "ok"
    try:
        outputs = COMMANDS[config.command](config, run_dir)
    except GibbsDivError as e:
        code = _exit_code(e)
        outcome = type(e).__name__
        logger.error("❌ %s", e.message)
        _report_error(e)
    finally:
        wall_time = time.perf_counter() - started
        manifest = write_manifest(run_dir, config, wall_time, outputs, outcome)
        logger.info("💾 манифест: %s (%.2f с)", manifest, wall_time)

    if code != EXIT_OK:
        status(f"❌ завершено с кодом {code}", style="red")
    return code


if __name__ == "__main__":
    sys.exit(main())
