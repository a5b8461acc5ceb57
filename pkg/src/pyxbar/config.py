"""
This module defines the configuration hierarchy for ``pyxbar``, using ``everett``'s
``~everett.manager.ConfigManager``. The hierarchy is (lowest to highest priority):

    1. Hardcoded defaults
    2. User configuration file
    3. Run-specific configuration
    4. Environment variables
    5. Command-line switches

Build a ``PyxbarConfigManager`` with :meth:`PyxbarConfigManager.from_pyxbar_cfg`
and call it with the key you need.

User Configuration File
-----------------------

The files found at these locations are used, in highest to lowest priority order:

    1. ``${PYXBAR_CONFIG_FILE}``
    2. ``${XDG_CONFIG_HOME}/pyxbar.yaml``
    3. ``${XDG_CONFIG_HOME}/pyxbar/pyxbar.yaml``
    4. ``~/.pyxbar.yaml``

``${XDG_CONFIG_HOME}`` defaults to ``~/.config``.

Configuration Options
---------------------

.. autocomponentconfig:: pyxbar.config.PyxbarConfig
   :case: upper
   :show-table:
   :namespace: pyxbar

Usage
-----

    >>> config = PyxbarConfigManager.from_pyxbar_cfg({})
    >>> config("il_floor_db")
    40.0
    >>> config = PyxbarConfigManager.from_pyxbar_cfg({"fit_restarts": "2"})
    >>> config("fit_restarts")
    2
"""

import os
import pathlib

from everett import InvalidKeyError
from everett.ext.yamlfile import ConfigYamlEnv
from everett.manager import (
    ChoiceOf,
    ConfigDictEnv,
    ConfigManager,
    ConfigOSEnv,
    Option,
    _get_component_name,
    parse_bool,
)


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    return parse_bool(value)


class PyxbarConfig:
    class Config:
        center_convention = Option(
            default="arithmetic",
            doc="How the passband centre is computed from the 3-dB edges.",
            parser=ChoiceOf(str, choices=["arithmetic", "geometric"]),
        )
        dask_scheduler = Option(
            default="threads",
            doc="Dask scheduler used for parallel restarts. See: https://docs.dask.org/en/stable/scheduling.html",
            parser=ChoiceOf(str, choices=["threads", "processes", "synchronous"]),
        )
        fit_max_iterations = Option(
            parser=int,
            default="2000",
            doc="Maximum simplex iterations per restart when fitting mBVD models",
        )
        fit_restarts = Option(
            parser=int, default="8", doc="Number of multi-start restarts for fits"
        )
        il_floor_db = Option(
            parser=float,
            default="40",
            doc="A response needs some point below this insertion loss to have a passband",
        )
        il_sentinel_db = Option(
            parser=float,
            default="400",
            doc="Insertion loss reported where |S21| is exactly zero",
        )
        optimize_budget = Option(
            parser=int,
            default="5000",
            doc="Total number of design evaluations available to the optimizer",
        )
        optimize_starts = Option(
            parser=int, default="8", doc="Number of optimizer starts"
        )
        parallel = Option(
            parser=_parse_bool, default="yes", doc="Whether to run restarts in parallel."
        )
        quiet = Option(
            default=False, doc="Whether to suppress output.", parser=_parse_bool
        )
        random_seed = Option(
            parser=int, default="0", doc="Seed for multi-start perturbations"
        )
        touchstone_format = Option(
            default="MA",
            doc="Number format used when writing Touchstone files",
            parser=ChoiceOf(str, choices=["RI", "MA", "DB"]),
        )
        touchstone_frequency_unit = Option(
            default="GHz",
            doc="Frequency unit used when writing Touchstone files",
            parser=ChoiceOf(str, choices=["Hz", "kHz", "MHz", "GHz"]),
        )


class PyxbarConfigManager(ConfigManager):
    """
    Custom ConfigManager for pyxbar, with a predefined hierarchy and
    support for injecting run-specific configuration.
    """

    _XDG_CONFIG_HOME = os.environ.get("XDG_CONFIG_HOME", "~/.config")
    """str : The XDG configuration directory."""
    _CONFIG_FILES = [
        str(f)
        for f in [
            os.environ.get("PYXBAR_CONFIG_FILE"),
            pathlib.Path(f"{_XDG_CONFIG_HOME}/pyxbar.yaml").expanduser(),
            pathlib.Path(f"{_XDG_CONFIG_HOME}/pyxbar/pyxbar.yaml").expanduser(),
            pathlib.Path("~/.pyxbar.yaml").expanduser(),
        ]
        if f
    ]
    """List[str] : The list of configuration files to check for user configuration."""

    @classmethod
    def from_pyxbar_cfg(cls, run_specific_cfg=None):
        """
        Create a PyxbarConfigManager with the appropriate hierarchy.

        Parameters
        ----------
        run_specific_cfg : dict
            Optional. Overrides specific values for this run.
        """
        env_vars = ConfigOSEnv()
        run_specific = ConfigDictEnv(
            {k.upper(): v for k, v in (run_specific_cfg or {}).items()}
        )
        user_file = ConfigYamlEnv(cls._CONFIG_FILES)
        manager = cls(environments=[env_vars, run_specific, user_file])
        manager = manager.with_options(PyxbarConfig)
        return manager

    # NOTE: the parent implementation builds a plain ConfigManager in clone(),
    # which would drop the get() helper below after with_options().
    def clone(self):
        my_clone = PyxbarConfigManager(
            environments=list(self.envs),
            doc=self.doc,
            msg_builder=self.msg_builder,
            with_override=self.with_override,
        )
        my_clone.namespace = list(self.namespace)
        my_clone.bound_component = self.bound_component
        my_clone.bound_component_prefix = []
        my_clone.bound_component_options = self.bound_component_options

        my_clone.original_manager = self.original_manager

        return my_clone

    def __repr__(self) -> str:
        if self.bound_component:
            name = _get_component_name(self.bound_component)
            return f"<PyxbarConfigManager({name}): namespace:{self.get_namespace()}>"
        return f"<PyxbarConfigManager: namespace:{self.get_namespace()}>"

    def get(self, key, default=None, parser=None):
        """
        Get a configuration value by key, falling back to ``default``.

        Parameters
        ----------
        key : str
            The configuration key to get.
        default : Any
            Returned if the key is unknown.
        parser : Callable
            Optional. A callable to parse the configuration value.
        """
        try:
            return self(key, parser=parser)
        except InvalidKeyError:
            return default
