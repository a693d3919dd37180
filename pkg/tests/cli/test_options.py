"""
Tests for options dataclasses on the command line: types, config files,
precedence and the subcommand registry.
"""

import argparse
import json
import os
import tempfile
import textwrap
from dataclasses import dataclass, field
from io import StringIO
from typing import Literal, Optional
from unittest.mock import patch

import pytest
from result import Err, Ok

from gh_forge.cli.options import CommandLine, OptionsParser, load_config_file
from gh_forge.errors import StructuralError


@dataclass
class SampleOptions:
    """Options with one field of every supported kind."""

    name: str = field(default="default_name", metadata={"help": "The name"})
    count: int = 5
    threshold: float = field(default=0.5, metadata={"help": "Threshold value"})
    mode: Literal["fast", "slow"] = field(default="fast", metadata={"help": "Mode"})
    enabled: bool = field(default=True, metadata={"help": "Enable feature"})
    coords: tuple[int, int, int] = field(default=(0, 0, 0), metadata={"help": "Coordinates"})
    sizes: list[int] = field(default_factory=lambda: [8], metadata={"help": "Sample sizes"})
    limit: Optional[float] = field(default=None, metadata={"help": "Optional limit"})


@dataclass
class RequiredOptions:
    """Options with a required positional and a renamed flag."""

    space: str = field(metadata={"help": "Input file", "positional": True})
    bound: float = field(metadata={"help": "Bound D", "flag": "--D"})
    trials: int = field(default=10, metadata={"help": "Trials"})


def parse(options_type, args):
    parser = argparse.ArgumentParser()
    options = OptionsParser(options_type, parser)
    return options.build(vars(parser.parse_args(args)))


def write_config(data, suffix=".json"):
    with tempfile.NamedTemporaryFile(mode="w", suffix=suffix, delete=False) as f:
        if suffix == ".json":
            json.dump(data, f)
        else:
            f.write(data)
        return f.name


class TestOptionsParser:
    """Field types and defaults."""

    def test_defaults(self):
        options = parse(SampleOptions, [])
        assert options == SampleOptions()
        assert options.sizes == [8]

    def test_command_line_values(self):
        """Every field type parses from strings."""
        options = parse(
            SampleOptions,
            [
                "--name", "custom",
                "--count", "10",
                "--threshold", "2.5",
                "--mode", "slow",
                "--enabled", "false",
                "--coords", "(1, 2, 3)",
                "--sizes", "[16, 32]",
                "--limit", "0.25",
            ],
        )
        assert options.name == "custom"
        assert options.count == 10
        assert options.threshold == 2.5
        assert options.mode == "slow"
        assert options.enabled is False
        assert options.coords == (1, 2, 3)
        assert options.sizes == [16, 32]
        assert options.limit == 0.25

    def test_list_without_brackets(self):
        assert parse(SampleOptions, ["--sizes", "64,256"]).sizes == [64, 256]

    @pytest.mark.parametrize("value", ["yes", "TRUE", "2"])
    def test_strict_bool(self, value):
        """Only True/true/1 and False/false/0 are booleans."""
        with pytest.raises(SystemExit):
            parse(SampleOptions, ["--enabled", value])

    def test_tuple_length(self):
        with pytest.raises(SystemExit):
            parse(SampleOptions, ["--coords", "1,2"])

    def test_int_rejects_float(self):
        with pytest.raises(SystemExit):
            parse(SampleOptions, ["--sizes", "1.5"])

    def test_literal_choices(self):
        with pytest.raises(SystemExit):
            parse(SampleOptions, ["--mode", "medium"])

    def test_help_text(self):
        """Help comes from metadata and shows the default."""
        parser = argparse.ArgumentParser()
        OptionsParser(SampleOptions, parser)
        with patch("sys.stdout", new_callable=StringIO) as mock_stdout:
            with pytest.raises(SystemExit):
                parser.parse_args(["--help"])
            help_output = mock_stdout.getvalue()
        assert "Threshold value (default: 0.5)" in help_output
        assert "--coords" in help_output
        for action in parser._actions:
            if action.dest == "count":
                assert action.help == "(default: 5)"
                break
        else:
            pytest.fail("Could not find the count argument")

    def test_not_a_dataclass(self):
        with pytest.raises(TypeError, match="must be a dataclass"):
            OptionsParser(dict, argparse.ArgumentParser())


class TestRequiredFields:
    """Fields without defaults."""

    def test_positional_and_flag(self):
        options = parse(RequiredOptions, ["space.json", "--D", "0.5"])
        assert options == RequiredOptions("space.json", 0.5)

    def test_missing(self):
        with patch("sys.stderr", new_callable=StringIO) as mock_stderr:
            with pytest.raises(SystemExit):
                parse(RequiredOptions, ["space.json"])
        assert "--D" in mock_stderr.getvalue()

    def test_missing_positional(self):
        with patch("sys.stderr", new_callable=StringIO) as mock_stderr:
            with pytest.raises(SystemExit):
                parse(RequiredOptions, ["--D", "1"])
        assert "SPACE" in mock_stderr.getvalue()

    def test_required_from_config(self):
        """A config section can supply required fields."""
        config_file = write_config({"RequiredOptions": {"space": "from_config.json", "bound": 2}})
        try:
            options = parse(RequiredOptions, ["--config", config_file])
            assert options.space == "from_config.json"
            assert options.bound == 2.0
            assert isinstance(options.bound, float)
        finally:
            os.unlink(config_file)


class TestConfigFiles:
    """Precedence: default < config < command line."""

    def test_json_config(self):
        config_file = write_config({"SampleOptions": {"count": 7, "threshold": 2, "coords": [4, 5, 6]}})
        try:
            options = parse(SampleOptions, ["--config", config_file])
            assert options.count == 7
            assert options.threshold == 2.0
            assert options.coords == (4, 5, 6)
            assert options.name == "default_name"
        finally:
            os.unlink(config_file)

    def test_command_line_wins(self):
        config_file = write_config({"SampleOptions": {"count": 7, "mode": "slow"}})
        try:
            options = parse(SampleOptions, ["--config", config_file, "--count", "9"])
            assert options.count == 9
            assert options.mode == "slow"
        finally:
            os.unlink(config_file)

    def test_yaml_config(self):
        yaml_content = textwrap.dedent(
            """
            SampleOptions:
              name: yaml_test
              enabled: false
              sizes: [64, 128]
              limit: 1.5
            """
        )
        config_file = write_config(yaml_content, suffix=".yaml")
        try:
            options = parse(SampleOptions, ["--config", config_file])
            assert options.name == "yaml_test"
            assert options.enabled is False
            assert options.sizes == [64, 128]
            assert options.limit == 1.5
        finally:
            os.unlink(config_file)

    def test_other_sections_ignored(self):
        config_file = write_config({"OtherOptions": {"count": "not a number"}})
        try:
            assert parse(SampleOptions, ["--config", config_file]) == SampleOptions()
        finally:
            os.unlink(config_file)

    def test_wrong_type(self):
        """Type errors name the offending field."""
        config_file = write_config({"SampleOptions": {"count": "ten"}})
        try:
            with pytest.raises(TypeError, match="SampleOptions.count"):
                parse(SampleOptions, ["--config", config_file])
        finally:
            os.unlink(config_file)

    def test_bool_is_not_int(self):
        config_file = write_config({"SampleOptions": {"count": True}})
        try:
            with pytest.raises(TypeError):
                parse(SampleOptions, ["--config", config_file])
        finally:
            os.unlink(config_file)

    def test_tuple_length(self):
        config_file = write_config({"SampleOptions": {"coords": [1, 2]}})
        try:
            with pytest.raises(ValueError, match="length 3"):
                parse(SampleOptions, ["--config", config_file])
        finally:
            os.unlink(config_file)

    def test_literal_choice(self):
        config_file = write_config({"SampleOptions": {"mode": "medium"}})
        try:
            with pytest.raises(ValueError, match="one of"):
                parse(SampleOptions, ["--config", config_file])
        finally:
            os.unlink(config_file)

    def test_list_element_type(self):
        config_file = write_config({"SampleOptions": {"sizes": [1, "two"]}})
        try:
            with pytest.raises(TypeError, match=r"sizes\[1\]"):
                parse(SampleOptions, ["--config", config_file])
        finally:
            os.unlink(config_file)


class TestLoadConfigFile:
    def test_missing(self):
        with pytest.raises(FileNotFoundError):
            load_config_file("/nonexistent/options.json")

    def test_unsupported_format(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".toml", delete=False) as f:
            f.write("x = 1")
        try:
            with pytest.raises(ValueError, match="Unsupported file format"):
                load_config_file(f.name)
        finally:
            os.unlink(f.name)

    def test_invalid_json(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as f:
            f.write("{not json")
        try:
            with pytest.raises(ValueError, match="Invalid JSON"):
                load_config_file(f.name)
        finally:
            os.unlink(f.name)

    def test_not_a_mapping(self):
        config_file = write_config([1, 2, 3])
        try:
            with pytest.raises(ValueError, match="mapping"):
                load_config_file(config_file)
        finally:
            os.unlink(config_file)

    def test_empty_yaml(self):
        config_file = write_config("", suffix=".yml")
        try:
            assert load_config_file(config_file) == {}
        finally:
            os.unlink(config_file)


@pytest.fixture
def command_line():
    cli = CommandLine("prog", description="test program")
    calls = []

    @cli.command("group", "first", options=SampleOptions, help="First action")
    def first(options):
        calls.append(options)
        return 0

    @cli.command("group", "second", options=RequiredOptions, help="Second action")
    def second(options):
        calls.append(options)
        return 3

    @cli.command("single", options=SampleOptions, help="A one-word command")
    def single(options):
        calls.append(options)
        return 0

    return cli, calls


class TestCommandLine:
    """Subcommand routing."""

    def test_routes_to_handler(self, command_line):
        cli, calls = command_line
        invocation = cli.parse(["group", "second", "x.json", "--D", "1.5"])
        assert invocation.command.path == ("group", "second")
        assert invocation.run() == 3
        assert calls == [RequiredOptions("x.json", 1.5)]

    def test_one_word_command(self, command_line):
        cli, _ = command_line
        invocation = cli.parse(["-v", "single", "--count", "2"])
        assert invocation.verbose is True
        assert invocation.options.count == 2

    def test_options_per_command(self, command_line):
        """Each leaf parser only knows its own fields."""
        cli, _ = command_line
        with pytest.raises(SystemExit):
            cli.parse(["group", "first", "--D", "1"])

    def test_missing_action(self, command_line):
        cli, _ = command_line
        with pytest.raises(SystemExit):
            cli.parse(["group"])

    def test_safe_parse(self, command_line):
        cli, _ = command_line
        assert isinstance(cli.safe_parse(["group", "first"]), Ok)
        result = cli.safe_parse(["group", "second"])
        assert isinstance(result, Err)
        assert "status 2" in result.err()

    def test_safe_parse_config_error(self, command_line):
        cli, _ = command_line
        result = cli.safe_parse(["single", "--config", "/nonexistent/options.json"])
        assert isinstance(result, Err)
        assert "not found" in result.err()

    def test_config_type_error(self, command_line):
        """Wrong config types surface as StructuralError naming the field."""
        cli, _ = command_line
        config_file = write_config({"SampleOptions": {"count": "ten"}})
        try:
            with pytest.raises(StructuralError, match="SampleOptions.count"):
                cli.parse(["single", "--config", config_file])
        finally:
            os.unlink(config_file)

    def test_name_conflict(self, command_line):
        cli, _ = command_line
        with pytest.raises(ValueError, match="conflict"):
            cli.command("group", "first", options=SampleOptions)

    def test_path_length(self):
        cli = CommandLine("prog")
        with pytest.raises(ValueError):
            cli.command("a", "b", "c", options=SampleOptions)
        with pytest.raises(ValueError):
            cli.command(options=SampleOptions)
