"""
Subcommand options generated from dataclasses.

Each subcommand declares a dataclass; its fields become argparse arguments.
Help text comes from the ``help`` metadata key, ``positional`` turns a field
into a positional argument and ``flag`` overrides the option string. Values
are resolved as field default < config file section < command line, where
the config file (``--config``, JSON or YAML) holds one section per options
class name:

    {"ReproduceOptions": {"n": 512, "format": "csv"}}
"""

import argparse
import ast
import dataclasses
import json
import os
import typing
from typing import Any, Callable, Literal, Optional, Union

from result import Err, Ok, Result

from ..errors import StructuralError

try:
    import yaml

    HAS_YAML = True
except ImportError:
    HAS_YAML = False

Handler = Callable[[Any], int]


def _get_optional_inner_type(type_hint: Any) -> Optional[Any]:
    """Return T for Optional[T], otherwise None."""
    if getattr(type_hint, "__origin__", None) is Union:
        args = type_hint.__args__
        non_none_args = [a for a in args if a is not type(None)]
        if len(non_none_args) == 1 and type(None) in args:
            return non_none_args[0]
    return None


def _strict_bool(value: str) -> bool:
    """
    Parse a string to a boolean value strictly.

    Only accepts 'True', 'true', 'False', 'false', '1', '0'.
    """
    if value in ("True", "true", "1"):
        return True
    if value in ("False", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(
        f"Invalid boolean value: '{value}'. Must be one of: True, true, False, false, 1, 0"
    )


def _convert_item(item: str, typ: Any) -> Any:
    if typ is bool:
        return _strict_bool(item)
    try:
        value = ast.literal_eval(item) if typ in (int, float) else item
        if typ is int and isinstance(value, float):
            raise ValueError
        return typ(value)
    except Exception:
        raise argparse.ArgumentTypeError(f"Could not convert '{item}' to {typ.__name__}") from None


def _tuple_type_factory(tuple_type: Any) -> Callable[[str], tuple]:
    """Parser for ``"(a, b)"`` or ``"a,b"`` into a typed tuple of fixed length."""
    expected_types = tuple_type.__args__

    def parse_tuple(s: str) -> tuple:
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        items = [item.strip() for item in s.split(",") if item.strip()]
        if len(items) != len(expected_types):
            raise argparse.ArgumentTypeError(
                f"Invalid tuple value: expected {len(expected_types)} values, got {len(items)}"
            )
        return tuple(_convert_item(item, typ) for item, typ in zip(items, expected_types))

    return parse_tuple


def _list_type_factory(list_type: Any) -> Callable[[str], list]:
    """Parser for ``"[a, b]"`` or ``"a,b"`` into a typed list."""
    elem_type = list_type.__args__[0] if getattr(list_type, "__args__", None) else str

    def parse_list(s: str) -> list:
        if s.startswith("[") and s.endswith("]"):
            s = s[1:-1]
        return [_convert_item(item.strip(), elem_type) for item in s.split(",") if item.strip()]

    return parse_list


def load_config_file(config_path: str) -> dict[str, Any]:
    """
    Load configuration from a YAML or JSON file.

    Raises:
        FileNotFoundError: If the config file doesn't exist.
        ValueError: If the file format is not supported or invalid.
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    file_ext = os.path.splitext(config_path)[1].lower()
    with open(config_path, "r") as f:
        if file_ext in (".yaml", ".yml"):
            if not HAS_YAML:
                raise ValueError("YAML support not available. Please install PyYAML: pip install PyYAML")
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ValueError(f"Invalid YAML file: {e}")
        elif file_ext == ".json":
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"Invalid JSON file: {e}")
        else:
            raise ValueError(
                f"Unsupported file format: {file_ext}. Supported formats are: .yaml, .yml, .json"
            )
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Configuration file must hold a mapping, got {type(data).__name__}")
    return data


def validate_type(value: Any, arg_type: Any, field_name: str) -> None:
    """
    Check a config value against a field type.

    Raises:
        TypeError: If the value is not of the expected type.
        ValueError: If the value has the right type but an invalid shape or choice.
    """
    if value is dataclasses.MISSING:
        return
    inner_type = _get_optional_inner_type(arg_type)
    if inner_type is not None:
        if value is None:
            return
        arg_type = inner_type

    if arg_type is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError(f"Field '{field_name}' expects int, got {type(value).__name__}: {value!r}")
    elif arg_type is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise TypeError(f"Field '{field_name}' expects float, got {type(value).__name__}: {value!r}")
    elif arg_type is bool:
        if not isinstance(value, bool):
            raise TypeError(f"Field '{field_name}' expects bool, got {type(value).__name__}: {value!r}")
    elif arg_type is str:
        if not isinstance(value, str):
            raise TypeError(f"Field '{field_name}' expects str, got {type(value).__name__}: {value!r}")

    origin = getattr(arg_type, "__origin__", None)
    if origin in (list, typing.List):
        if not isinstance(value, list):
            raise TypeError(f"Field '{field_name}' expects list, got {type(value).__name__}: {value!r}")
        if getattr(arg_type, "__args__", None):
            for i, elem in enumerate(value):
                validate_type(elem, arg_type.__args__[0], f"{field_name}[{i}]")
    elif origin in (tuple, typing.Tuple):
        if not isinstance(value, (list, tuple)):
            raise TypeError(f"Field '{field_name}' expects tuple, got {type(value).__name__}: {value!r}")
        elem_types = getattr(arg_type, "__args__", ())
        if len(value) != len(elem_types):
            raise ValueError(
                f"Field '{field_name}' expects tuple of length {len(elem_types)}, got length {len(value)}"
            )
        for i, (elem, elem_type) in enumerate(zip(value, elem_types)):
            validate_type(elem, elem_type, f"{field_name}[{i}]")
    elif origin is Literal:
        choices = getattr(arg_type, "__args__", ())
        if value not in choices:
            raise ValueError(f"Field '{field_name}' expects one of {choices}, got {value!r}")


def _coerce(value: Any, arg_type: Any) -> Any:
    """Config files have no tuples and write floats like 2 as ints."""
    inner_type = _get_optional_inner_type(arg_type)
    if inner_type is not None:
        arg_type = inner_type
    if value is None:
        return value
    if arg_type is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    origin = getattr(arg_type, "__origin__", None)
    if origin in (tuple, typing.Tuple) and isinstance(value, list):
        return tuple(_coerce(v, t) for v, t in zip(value, arg_type.__args__))
    if origin in (list, typing.List) and isinstance(value, list) and getattr(arg_type, "__args__", None):
        return [_coerce(v, arg_type.__args__[0]) for v in value]
    return value


def _format_description(description: str, default_value: Any) -> str:
    if default_value is None:
        return description
    default_suffix = f"(default: {default_value})"
    return f"{description} {default_suffix}" if description else default_suffix


def _field_default(field: dataclasses.Field) -> Any:
    if field.default is not dataclasses.MISSING:
        return field.default
    if field.default_factory is not dataclasses.MISSING:
        return field.default_factory()
    return dataclasses.MISSING


class OptionsParser:
    """
    Adds the fields of one options dataclass to an argparse parser and builds
    instances from the parsed namespace.

    Example:
        @dataclass
        class ExactOptions:
            left: str = field(metadata={"help": "Metric space JSON", "positional": True})
            budget: int = field(default=200_000, metadata={"help": "Search node limit"})

        options = OptionsParser(ExactOptions, argparse.ArgumentParser())
        instance = options.build(vars(options.parser.parse_args(["a.json"])))
    """

    def __init__(
        self,
        options_type: type,
        parser: argparse.ArgumentParser,
        config_flag: str = "--config",
    ) -> None:
        if not dataclasses.is_dataclass(options_type):
            raise TypeError(f"{getattr(options_type, '__name__', options_type)!r} must be a dataclass")
        self.options_type = options_type
        self.parser = parser
        self.fields = dataclasses.fields(options_type)
        self.type_hints = typing.get_type_hints(options_type)
        parser.add_argument(
            config_flag,
            type=str,
            metavar="FILE",
            dest="config",
            help="Path to configuration file (YAML or JSON format)",
        )
        for field in self.fields:
            self._add_field_argument(field)

    def _add_field_argument(self, field: dataclasses.Field) -> None:
        arg_type = self.type_hints.get(field.name, str)
        inner_type = _get_optional_inner_type(arg_type)
        if inner_type is not None:
            arg_type = inner_type
        default_value = _field_default(field)
        description = _format_description(
            field.metadata.get("help", ""),
            None if default_value is dataclasses.MISSING else default_value,
        )
        kwargs: dict[str, Any] = {"help": description, "default": None}
        origin = getattr(arg_type, "__origin__", None)
        if origin is Literal:
            choices = arg_type.__args__
            kwargs.update(type=str, choices=choices, metavar="{" + ",".join(map(str, choices)) + "}")
        elif origin in (tuple, typing.Tuple):
            kwargs.update(type=_tuple_type_factory(arg_type), metavar="TUPLE")
        elif origin in (list, typing.List):
            kwargs.update(type=_list_type_factory(arg_type), metavar="LIST")
        elif arg_type is bool:
            kwargs.update(type=_strict_bool, metavar="BOOL")
        else:
            basic = {int: "INT", float: "FLOAT", str: "STRING"}
            kwargs.update(type=arg_type, metavar=basic.get(arg_type, getattr(arg_type, "__name__", "VALUE").upper()))

        if field.metadata.get("positional"):
            kwargs["metavar"] = field.name.upper()
            self.parser.add_argument(field.name, nargs="?", **kwargs)
        else:
            flag = field.metadata.get("flag", f"--{field.name.replace('_', '-')}")
            self.parser.add_argument(flag, dest=field.name, **kwargs)

    def build(self, parsed_args: dict[str, Any]) -> Any:
        """
        Resolve every field and instantiate the options class.

        Raises:
            SystemExit: Through ``parser.error`` when required fields are missing.
            TypeError, ValueError: When a config value has the wrong type.
        """
        config_data: dict[str, Any] = {}
        if parsed_args.get("config"):
            config_data = load_config_file(parsed_args["config"])
        section = config_data.get(self.options_type.__name__, {}) or {}

        values = {}
        missing_fields = []
        for field in self.fields:
            arg_type = self.type_hints.get(field.name, str)
            value = _field_default(field)
            if field.name in section:
                value = _coerce(section[field.name], arg_type)
                validate_type(value, arg_type, f"{self.options_type.__name__}.{field.name}")
            if parsed_args.get(field.name) is not None:
                value = parsed_args[field.name]
            if value is dataclasses.MISSING:
                missing_fields.append(
                    field.name.upper()
                    if field.metadata.get("positional")
                    else field.metadata.get("flag", f"--{field.name.replace('_', '-')}")
                )
            else:
                values[field.name] = value

        if missing_fields:
            self.parser.error(
                f"Missing required arguments for {self.options_type.__name__}: {', '.join(missing_fields)}. "
                "These must be provided either as command-line arguments or in the config file."
            )
        return self.options_type(**values)


@dataclasses.dataclass(frozen=True)
class Command:
    path: tuple[str, ...]
    options_type: type
    handler: Handler
    help: str = ""


@dataclasses.dataclass(frozen=True)
class Invocation:
    command: Command
    options: Any
    verbose: bool = False

    def run(self) -> int:
        return self.command.handler(self.options)


class CommandLine:
    """
    A subcommand-style command line whose leaves are options dataclasses.

    Example:
        cli = CommandLine("gh-forge")

        @cli.command("gh", "exact", options=ExactOptions, help="Exact GH of two small spaces")
        def exact(options: ExactOptions) -> int:
            ...

        cli.parse(["gh", "exact", "a.json", "b.json"]).run()
    """

    def __init__(self, prog: str, description: str = "", config_flag: str = "--config") -> None:
        self.prog = prog
        self.description = description
        self.config_flag = config_flag
        self.commands: dict[tuple[str, ...], Command] = {}

    def command(self, *path: str, options: type, help: str = "") -> Callable[[Handler], Handler]:
        if not path or len(path) > 2:
            raise ValueError("Commands have one or two words")
        if path in self.commands:
            raise ValueError(f"Command name conflict: {' '.join(path)}")

        def register(handler: Handler) -> Handler:
            self.commands[path] = Command(path, options, handler, help)
            return handler

        return register

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=self.prog, description=self.description)
        parser.add_argument("--verbose", "-v", action="store_true", help="Log debug messages")
        groups = parser.add_subparsers(dest="group", metavar="COMMAND", required=True)
        group_parsers: dict[str, argparse.ArgumentParser] = {}
        actions: dict[str, Any] = {}
        for path, command in self.commands.items():
            head = path[0]
            if len(path) == 1:
                leaf = groups.add_parser(head, help=command.help, description=command.help)
            else:
                if head not in group_parsers:
                    group_parsers[head] = groups.add_parser(head, help=f"{head} commands")
                    actions[head] = group_parsers[head].add_subparsers(
                        dest="action", metavar="ACTION", required=True
                    )
                leaf = actions[head].add_parser(path[1], help=command.help, description=command.help)
            options = OptionsParser(command.options_type, leaf, self.config_flag)
            leaf.set_defaults(command=command, options_parser=options)
        return parser

    def parse(self, args: Optional[list[str]] = None) -> Invocation:
        """
        Parse arguments into the selected command and its options instance.

        Raises:
            SystemExit: On argparse errors or missing required fields.
            StructuralError: When a config value has the wrong type.
        """
        namespace = vars(self.build_parser().parse_args(args))
        options_parser: OptionsParser = namespace["options_parser"]
        try:
            options = options_parser.build(namespace)
        except TypeError as e:
            raise StructuralError(str(e)) from e
        return Invocation(namespace["command"], options, bool(namespace.get("verbose")))

    def safe_parse(self, args: Optional[list[str]] = None) -> Result[Invocation, str]:
        """Like :meth:`parse`, returning ``Err(message)`` instead of raising."""
        try:
            return Ok(self.parse(args))
        except SystemExit as e:
            return Err(f"argument parsing failed with status {e.code}")
        except Exception as e:
            return Err(str(e))
