"""Take care of holding the current configuration (tolerances, solver limits, ...)

"""
from dataclasses import dataclass
import json
import os
from os.path import dirname, isabs, join

import yaml

from gaussep.exceptions import ConfigError
from gaussep.utils import merge_deep_dicts


@dataclass(frozen=True)
class Tolerances:
    """Numerical bands. psd and verdict are relative to the spectral norm
    of the matrix under test, alg bounds algebraic identities."""
    psd: float = 1e-9
    alg: float = 1e-8
    verdict: float = 1e-7


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 5000
    bisection_depth: int = 40
    epsilon: float = 0.0
    epsilon_retries: int = 3
    certificate_check_every: int = 50
    stall_window: int = 400


def _load_defaults():
    with open(join(dirname(__file__), "default_config.json")) as stream:
        return json.load(stream)


class Settings:
    def __init__(self):
        self.file = None
        self.config = _load_defaults()

    def load_from(self, filename):
        if not isabs(filename):
            filename = join(os.getcwd(), filename)

        if not filename.endswith(('json', 'yaml', 'yml')):
            raise ConfigError('[CONFIG] config file must be in JSON or YAML format!')

        try:
            with open(filename, 'r') as stream:
                if filename.endswith('json'):
                    user_config = json.load(stream)
                else:
                    user_config = yaml.safe_load(stream)
        except (OSError, ValueError, yaml.YAMLError) as error:
            raise ConfigError('[CONFIG] Error in config file: ' + str(error))

        if user_config is None:
            user_config = {}
        if not isinstance(user_config, dict):
            raise ConfigError('[CONFIG] top level of the config file must be a mapping!')

        self.file = filename
        self.config = merge_deep_dicts(_load_defaults(), user_config)
        self._check()

    def update(self, overrides):
        """Deep-merge programmatic overrides (e.g. from command line flags)"""
        self.config = merge_deep_dicts(self.config, overrides)
        self._check()

    def reset(self):
        self.file = None
        self.config = _load_defaults()

    def _check(self):
        for name, value in self['tolerances'].items():
            if not isinstance(value, (int, float)) or value < 0:
                raise ConfigError(
                    f"[CONFIG] tolerances:{name} must be a non-negative number, got {value!r}"
                )
        solver = self['solver']
        for name in ('max_iterations', 'bisection_depth', 'certificate_check_every'):
            if int(solver[name]) < 1:
                raise ConfigError(f"[CONFIG] solver:{name} must be at least 1!")
        if solver['epsilon'] < 0:
            raise ConfigError("[CONFIG] solver:epsilon must be non-negative!")

    def __getitem__(self, key):
        return self.config[key]

    def __setitem__(self, key, value):
        self.config[key] = value

    @property
    def tolerances(self):
        return Tolerances(**{
            key: float(value) for key, value in self['tolerances'].items()
        })

    @property
    def solver(self):
        config = self['solver']
        return SolverConfig(
            max_iterations=int(config['max_iterations']),
            bisection_depth=int(config['bisection_depth']),
            epsilon=float(config['epsilon']),
            epsilon_retries=int(config['epsilon_retries']),
            certificate_check_every=int(config['certificate_check_every']),
            stall_window=int(config['stall_window']),
        )


settings = Settings()


def resolve_tolerances(tol=None):
    return settings.tolerances if tol is None else tol


def resolve_solver(config=None):
    return settings.solver if config is None else config
