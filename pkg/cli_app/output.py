# cli_app/output.py

"""
Каталог запуска, логирование, манифест и скрипты gnuplot

Каждый запуск пишет всё в свой каталог run_<id>: log.txt, manifest.yaml,
CSV/JSON результаты и скрипты графиков.
"""

import json
import logging
import platform
import sys
import uuid
from importlib import metadata as importlib_metadata
from pathlib import Path

import yaml
from rich.console import Console
from rich.logging import RichHandler

from .config import default_output_root

console = Console(stderr=True)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
VERSIONED_PACKAGES = ("numpy", "scipy", "pandas", "joblib", "PyYAML", "rich", "python-dotenv")


def create_run_dir(out=None):
    """
    Каталог вывода: --out, либо <GIBBSDIV_OUTPUT_ROOT>/run_<8 символов uuid>
    """
    if out:
        path = Path(out)
    else:
        run_id = str(uuid.uuid4())[:8]
        path = default_output_root() / f"run_{run_id}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def setup_logging(run_dir=None, verbose=False):
    """RichHandler на stderr и простой текстовый log.txt в каталоге запуска"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    rich_handler = RichHandler(console=console, show_path=False, markup=False)
    rich_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.addHandler(rich_handler)

    if run_dir is not None:
        file_handler = logging.FileHandler(Path(run_dir) / "log.txt", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        file_handler.setLevel(logging.DEBUG)
        root.addHandler(file_handler)
    return root


def write_json(path, payload):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False, default=_json_default)
    return path


def _json_default(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Path):
        return str(value)
    return float(value)


def library_versions():
    versions = {"python": platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = importlib_metadata.version(name)
        except importlib_metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_manifest(run_dir, config, wall_time, outputs=None, status="ok"):
    """manifest.yaml: конфигурация, версии, seed, время, список файлов"""
    payload = {
        "config": config.to_dict(),
        "seed": config.seed,
        "versions": library_versions(),
        "argv": list(sys.argv),
        "wall_time": float(wall_time),
        "status": status,
        "outputs": sorted(str(p) for p in (outputs or [])),
    }
    path = Path(run_dir) / "manifest.yaml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(payload, f, allow_unicode=True, sort_keys=False)
    return path


def write_density_plot(path, csv_name, title):
    """Скрипт gnuplot для CSV s,pdf,cdf"""
    script = "\n".join([
        'set datafile separator ","',
        f'set title "{title}"',
        "set logscale x",
        'set xlabel "s"',
        'set ylabel "density"',
        "set key top right",
        "set y2tics",
        f'plot "{csv_name}" using 1:2 skip 1 with lines lw 2 title "pdf", \\',
        f'     "{csv_name}" using 1:3 skip 1 axes x1y2 with lines dt 2 title "cdf"',
        "",
    ])
    Path(path).write_text(script, encoding="utf-8")
    return path


def write_sample_plot(path, sample_csv, grid_csv, title):
    """Скрипт gnuplot: эмпирическая CDF выборки поверх теоретической"""
    lines = [
        'set datafile separator ","',
        f'set title "{title}"',
        'set xlabel "K_m / m^alpha"',
        'set ylabel "CDF"',
        "set key bottom right",
    ]
    plot = f'plot "{sample_csv}" using 2:(1.0) skip 1 smooth cnormal with steps title "empirical"'
    if grid_csv is not None:
        plot += f', \\\n     "{grid_csv}" using 1:3 skip 1 with lines lw 2 title "theory"'
    lines.extend([plot, ""])
    Path(path).write_text("\n".join(lines), encoding="utf-8")
    return path


def status(message, style=None):
    """Строка статуса для человека (stderr)"""
    console.print(message, style=style, highlight=False)
