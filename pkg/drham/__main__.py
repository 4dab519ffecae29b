import os
import sys
import asyncio
import logging
import textwrap
import typing
from collections import OrderedDict
from drham.constants import (DEFAULT_CASES, DEFAULT_DEGREE_CAP, DEFAULT_GENUS, DEFAULT_JOBS, DEFAULT_SEED,
                             EXIT_CONFIGURATION, EXIT_OK, JOBS_ENV_VAR)
from drham.fault import ConfigurationError
from drham.verify import RunConfig, Verifier, cli_commands, run_cli

log = logging.getLogger("drham")
handler = logging.StreamHandler()
handler.setFormatter(logging.Formatter('%(asctime)-15s-%(filename)s:%(lineno)s->%(message)s'))
log.addHandler(handler)
log.setLevel(logging.WARNING)

base_usage = "\n".join(textwrap.wrap(
    "drham [-h] [--debug_logging] [--genus=<genus>] [--seed=<seed>] [--json=<path>] [--jobs=<jobs>]"
    " [--g-file=<path>] [--d-max=<d_max>] [--depth=<depth>] [--degree-cap=<degree>] [--timings]"
    " <command> [<target>]",
    100, subsequent_indent='  ', break_long_words=False)) + "\n"

command_options = {
    'verify': "<target> [--genus=<int>] [--d-max=<int>] [--depth=<int>] [--degree-cap=<int>] [--g-file=<str>]"
              " [--jobs=<int>] [--json=<str>] [--timings]",
    'properties': "[--suite=<str>] [--cases=<int>] [--seed=<int>] [--mutate=<str>] [--jobs=<int>] [--json=<str>]"
                  " [--timings]",
}

flags = ('debug_logging', 'timings')

integer_options = ('genus', 'seed', 'jobs', 'd_max', 'depth', 'cases', 'degree_cap')


def get_help(command: str) -> str:
    _, doc = Verifier.get_annotations(command)
    doc = doc or ""
    usage = "\n".join(textwrap.wrap(
        f"drham [-h] [--debug_logging] {command} {command_options[command]}",
        100, subsequent_indent='  ', break_long_words=False)) + "\n"
    return usage + textwrap.dedent(doc)


def parse_args(args: typing.List[str]) -> typing.Tuple[typing.Dict[str, typing.Any], typing.List[str]]:
    """Split --key=value, --key value and bare flags from positional arguments, anywhere on the line."""
    options: typing.Dict[str, typing.Any] = OrderedDict()
    positional: typing.List[str] = []
    i = 0
    while i < len(args):
        arg = args[i]
        i += 1
        if not arg.startswith("--"):
            positional.append(arg)
            continue
        if "=" in arg:
            k, v = arg[2:].split("=", 1)
            options[k.replace("-", "_")] = v
            continue
        k = arg[2:].replace("-", "_")
        if k in flags:
            options[k] = True
        elif i < len(args):
            options[k] = args[i]
            i += 1
        else:
            raise ConfigurationError(f"--{k} needs a value")
    return options, positional


def build_config(options: typing.Dict[str, typing.Any]) -> RunConfig:
    defaults: typing.Dict[str, typing.Any] = {
        'genus': DEFAULT_GENUS,
        'seed': DEFAULT_SEED,
        'json': None,
        'jobs': os.environ.get(JOBS_ENV_VAR, DEFAULT_JOBS),
        'g_file': None,
        'd_max': None,
        'depth': None,
        'suite': None,
        'cases': DEFAULT_CASES,
        'mutate': None,
        'timings': False,
        'degree_cap': DEFAULT_DEGREE_CAP,
    }
    unknown = [k for k in options if k not in defaults]
    if unknown:
        raise ConfigurationError(f"unknown option --{unknown[0].replace('_', '-')}")
    values = dict(defaults)
    values.update(options)
    for k in integer_options:
        if values[k] is None:
            continue
        try:
            values[k] = int(values[k])
        except (TypeError, ValueError):
            source = JOBS_ENV_VAR if k == 'jobs' and 'jobs' not in options else f"--{k.replace('_', '-')}"
            raise ConfigurationError(f"{source} expects an integer, got {values[k]!r}")
    values['timings'] = values['timings'] is True or str(values['timings']).lower() in ('1', 'true', 'yes')
    return RunConfig(**values)


def main(argv: typing.Optional[typing.List[typing.Optional[str]]] = None,
         loop: typing.Optional[asyncio.AbstractEventLoop] = None) -> int:
    argv = argv or list(sys.argv)
    help_str = "\n".join(textwrap.wrap(
        " | ".join(cli_commands), 100, initial_indent='  ', subsequent_indent='  ', break_long_words=False
    ))

    usage = \
        "%s\n" \
        "Checks the bihamiltonian structure of the double ramification hierarchy for the builtin\n" \
        "theories, exactly or to a stated eps-order. For example:\n" \
        "  drham verify kdv\n" \
        "  drham --genus=2 verify cp1 --json=cp1.json\n\n" \
        "Commands:\n" \
        "%s\n\n" \
        "For help with a specific command:" \
        "  drham help <command>" % (base_usage, help_str)

    args: typing.List[str] = [str(arg) for arg in argv[1:]]
    if not args:
        print(usage)
        return EXIT_OK
    if args[0] in ['help', '-h', '--help']:
        if len(args) > 1:
            if args[1] in cli_commands:
                print(get_help(args[1]))
                return EXIT_OK
        print(usage)
        return EXIT_OK

    try:
        options, positional = parse_args(args)
        if options.pop('debug_logging', False):
            log.setLevel(logging.DEBUG)
        cfg = build_config(options)
    except ConfigurationError as err:
        print("drham encountered an error: %s" % str(err))
        return EXIT_CONFIGURATION

    if not positional:
        print("no command given")
        print(usage)
        return EXIT_OK
    command, *command_args = positional
    return run_cli(command, cfg, command_args, loop)


if __name__ == "__main__":
    sys.exit(main())   # pragma: no cover
