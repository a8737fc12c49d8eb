"""Python access to the ceca next-event predictor."""

import json

from ._core import ConfigError, DataError, Model, run, synthesize

__all__ = ["CliError", "ConfigError", "DataError", "Model", "cli", "cli_json", "run", "synthesize"]


class CliError(RuntimeError):
    def __init__(self, code, stderr):
        super().__init__(f"ceca exited with {code}: {stderr.strip()}")
        self.code = code
        self.stderr = stderr


def cli(*args):
    """Run a subcommand and return its stdout; raises CliError on a non-zero exit."""
    code, out, err = run([str(a) for a in args])
    if code != 0:
        raise CliError(code, err)
    return out


def cli_json(*args):
    return json.loads(cli(*args))
