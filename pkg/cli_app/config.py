# cli_app/config.py

"""
Конфигурация запуска: флаги, переменные окружения, манифест

Значения по умолчанию для каталога вывода, кэша таблиц и числа
воркеров берутся из .env (через python-dotenv).
"""

import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml
from dotenv import load_dotenv

from diversity.conditional import ConditioningState
from gibbs_weights.models import GeneralizedGamma, PoissonDirichlet, TabulatedTilt
from gibbs_weights.weights import WEIGHT_METHODS
from stable_core.errors import ConfigError

COMMANDS = ("pdf", "weights", "simulate", "moments", "verify")
MODEL_KINDS = ("pd", "gg", "gtilde", "tilt-table")
SUITES = ("stable", "weights", "diversity", "mc", "all")
TOLERANCE_DEFAULTS = {
    "ks": 0.05,
    "mass": 1e-6,
    "moment": 1e-4,
    "residual": 1e-8,
    "gap": 1e-10,
    "agreement": 1e-6,
}
GG_SIMULATION_CAP = 2000
PD_SIMULATION_CAP = 1_000_000
MAX_MOMENT_ORDER = 10
DEFAULT_SEED = 2024
DEFAULT_NMAX = 50


def load_environment():
    """Подхватить .env из текущего каталога"""
    load_dotenv()


def default_output_root():
    return Path(os.getenv("GIBBSDIV_OUTPUT_ROOT", "runs"))


def default_jobs():
    value = os.getenv("GIBBSDIV_JOBS", "1")
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"GIBBSDIV_JOBS должен быть целым, получено {value!r}", {"GIBBSDIV_JOBS": value})


def parse_tolerances(items):
    """
    Переопределения допусков вида key=value

    Example:
        >>> parse_tolerances(["ks=0.2"])["ks"]
        0.2
    """
    tolerances = dict(TOLERANCE_DEFAULTS)
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"допуск должен иметь вид key=value, получено {item!r}", {"tol": item})
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in TOLERANCE_DEFAULTS:
            raise ConfigError(
                f"неизвестный допуск {key!r}",
                {"tol": key, "known": sorted(TOLERANCE_DEFAULTS)},
            )
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"допуск {key} должен быть числом, получено {raw!r}", {"tol": item})
        if not (math.isfinite(value) and value > 0.0):
            raise ConfigError(f"допуск {key} должен быть > 0", {"tol": item})
        tolerances[key] = value
    return tolerances


@dataclass(frozen=True)
class GridSpec:
    """
    Явная сетка lo:hi:points[:log]

    Example:
        >>> GridSpec.parse("0.1:10:3:log").points()
        array([ 0.1,  1. , 10. ])
    """

    lo: float
    hi: float
    count: int
    log: bool = False

    @classmethod
    def parse(cls, text):
        parts = str(text).split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise ConfigError(f"сетка должна иметь вид lo:hi:points[:log], получено {text!r}", {"grid": text})
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"не удалось разобрать сетку {text!r}", {"grid": text})
        if not (0.0 < lo < hi and math.isfinite(hi)):
            raise ConfigError("сетка требует 0 < lo < hi", {"grid": text})
        if count < 2:
            raise ConfigError("сетка требует не меньше 2 точек", {"grid": text})
        return cls(lo, hi, count, len(parts) == 4)

    def points(self):
        if self.log:
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}:{self.count}" + (":log" if self.log else "")


@dataclass
class RunConfig:
    """
    Полная конфигурация одного запуска

    Проверяется целиком до начала вычислений; ошибка называет нарушенное
    условие.
    """

    command: str
    model: str = "pd"
    alpha: float = 0.5
    theta: float = None
    beta: float = None
    tilt_file: str = None
    n: int = None
    k: int = None
    m: int = 0
    reps: int = 1000
    grid: str = None
    seed: int = DEFAULT_SEED
    jobs: int = 1
    out: str = None
    tol: dict = field(default_factory=lambda: dict(TOLERANCE_DEFAULTS))
    nmax: int = DEFAULT_NMAX
    order: int = 3
    t: float = 0.5
    suite: str = "all"
    method: str = "auto"

    def __post_init__(self):
        merged = dict(TOLERANCE_DEFAULTS)
        merged.update(self.tol or {})
        self.tol = merged

    # --- проверка ---

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"неизвестная команда {self.command!r}", {"command": self.command})
        unknown = set(self.tol) - set(TOLERANCE_DEFAULTS)
        if unknown:
            raise ConfigError(f"неизвестные допуски {sorted(unknown)}", {"tol": sorted(unknown)})
        if self.jobs == 0:
            raise ConfigError("--jobs не может быть 0", {"jobs": self.jobs})
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("--seed должен быть 64-битным неотрицательным", {"seed": self.seed})
        if self.method not in WEIGHT_METHODS:
            raise ConfigError(f"--method должен быть одним из {WEIGHT_METHODS}", {"method": self.method})

        if self.command == "verify":
            if self.suite not in SUITES:
                raise ConfigError(f"--suite должен быть одним из {SUITES}", {"suite": self.suite})
            return self

        self._validate_model()
        if self.grid is not None:
            GridSpec.parse(self.grid)

        if self.command == "weights":
            if int(self.nmax) < 1:
                raise ConfigError("--nmax должен быть >= 1", {"nmax": self.nmax})
        elif self.command == "pdf":
            if (self.n is None) != (self.k is None):
                raise ConfigError("--n и --k задаются вместе", {"n": self.n, "k": self.k})
            if self.n is not None:
                self._validate_state()
            elif self.model == "gtilde":
                raise ConfigError("модель gtilde требует --n и --k")
        elif self.command == "simulate":
            self._validate_state()
            if int(self.m) < 0:
                raise ConfigError("--m должен быть >= 0", {"m": self.m})
            if int(self.reps) < 1:
                raise ConfigError("--reps должен быть >= 1", {"reps": self.reps})
            cap = GG_SIMULATION_CAP if self.model in ("gg", "tilt-table") else PD_SIMULATION_CAP
            if self.n + self.m > cap:
                raise ConfigError(
                    f"для модели {self.model} требуется n + m <= {cap}",
                    {"n": self.n, "m": self.m, "cap": cap},
                )
        elif self.command == "moments":
            self._validate_state()
            if not (0 <= int(self.order) <= MAX_MOMENT_ORDER):
                raise ConfigError(f"--order должен быть в 0..{MAX_MOMENT_ORDER}", {"order": self.order})
            if not math.isfinite(float(self.t)):
                raise ConfigError("--t должен быть конечным", {"t": self.t})
        return self

    def _validate_model(self):
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"--model должен быть одним из {MODEL_KINDS}", {"model": self.model})
        if not (0.0 < float(self.alpha) < 1.0):
            raise ConfigError("нужно 0 < α < 1", {"alpha": self.alpha})
        if self.model == "pd":
            if self.theta is None:
                raise ConfigError("модель pd требует --theta")
            if not float(self.theta) > -float(self.alpha):
                raise ConfigError("модель pd требует θ > -α", {"theta": self.theta, "alpha": self.alpha})
        elif self.model == "gg":
            if self.beta is None or not float(self.beta) > 0.0:
                raise ConfigError("модель gg требует --beta > 0", {"beta": self.beta})
        elif self.model == "tilt-table":
            if not self.tilt_file or not Path(self.tilt_file).exists():
                raise ConfigError("модель tilt-table требует существующий --tilt-file", {"tilt_file": self.tilt_file})

    def _validate_state(self):
        if self.n is None or self.k is None:
            raise ConfigError(f"команда {self.command} требует --n и --k")
        if not (1 <= int(self.k) <= int(self.n)):
            raise ConfigError("нужно 1 <= k <= n", {"n": self.n, "k": self.k})

    # --- построение объектов ---

    def build_model(self):
        if self.model == "pd":
            return PoissonDirichlet(self.alpha, self.theta)
        if self.model == "gtilde":
            return PoissonDirichlet(self.alpha, 0.0)
        if self.model == "gg":
            return GeneralizedGamma(self.alpha, self.beta)
        return TabulatedTilt.from_csv(self.tilt_file, self.alpha)

    def state(self):
        if self.n is None:
            return None
        return ConditioningState(int(self.n), int(self.k))

    def grid_points(self):
        return None if self.grid is None else GridSpec.parse(self.grid).points()

    # --- сериализация ---

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_args(cls, args):
        """
        RunConfig из argparse.Namespace; --manifest задаёт базу, флаги её дополняют

        Каталог вывода из манифеста не наследуется: повтор пишет в новый
        run_<id> (или в явный --out, но не в каталог самого манифеста).
        """
        base = {}
        manifest = getattr(args, "manifest", None)
        if manifest:
            base = load_manifest(manifest)
            base.pop("out", None)
        names = {f for f in cls.__dataclass_fields__}
        for name in names:
            value = getattr(args, name, None)
            if name == "tol":
                if value:
                    base["tol"] = {**base.get("tol", {}), **_explicit_tolerances(value)}
                continue
            if value is not None:
                base[name] = value
        base.setdefault("command", args.command)
        base["command"] = args.command
        if base.get("jobs") is None:
            base["jobs"] = default_jobs()
        if manifest and base.get("out") and Path(base["out"]).resolve() == Path(manifest).resolve().parent:
            raise ConfigError(
                "повтор не может писать в каталог исходного манифеста",
                {"manifest": str(manifest), "out": str(base["out"])},
            )
        return cls(**base)


def _explicit_tolerances(items):
    parsed = parse_tolerances(items)
    keys = {item.split("=", 1)[0].strip() for item in items}
    return {key: parsed[key] for key in keys}


def load_manifest(path):
    """Секция config из manifest.yaml прошлого запуска"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"манифест {path} не найден", {"manifest": str(path)})
    with open(path, "r", encoding="utf-8") as f:
        payload = yaml.safe_load(f) or {}
    config = payload.get("config", payload)
    if not isinstance(config, dict):
        raise ConfigError("манифест должен содержать словарь config", {"manifest": str(path)})
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(config) - known
    if unknown:
        raise ConfigError(f"неизвестные поля манифеста {sorted(unknown)}", {"manifest": str(path)})
    return dict(config)
