import dataclasses
import types
from argparse import SUPPRESS, ArgumentParser, ArgumentTypeError, RawDescriptionHelpFormatter
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Literal, Tuple, Union, get_args, get_origin, get_type_hints

import yaml

from ..errors import ConfigError


def string_to_bool(v):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("yes", "true", "t", "y", "1"):
        return True
    elif str(v).lower() in ("no", "false", "f", "n", "0"):
        return False
    else:
        raise ArgumentTypeError(
            f"Truthy value expected: got {v} but expected one of yes/no, true/false, t/f, y/n, 1/0 (case insensitive)."
        )


def make_choice_type_function(choices: list) -> Callable[[str], Any]:
    str_to_choice = {str(choice): choice for choice in choices}
    return lambda arg: str_to_choice.get(arg, arg)


def _strip_optional(annotation) -> Tuple[Any, bool]:
    origin = get_origin(annotation)
    if origin is Union or (hasattr(types, "UnionType") and isinstance(annotation, getattr(types, "UnionType"))):
        args = [arg for arg in get_args(annotation) if arg is not type(None)]
        if len(args) != 1:
            raise ConfigError(f"Only `Optional[X]` unions are supported, got {annotation}.")
        return args[0], True
    return annotation, False


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    r"""
    Read a flat configuration file: YAML for `.yaml`/`.yml`, `key=value` lines otherwise.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file `{path}` does not exist.")
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        values = yaml.safe_load(text) or {}
        if not isinstance(values, dict):
            raise ConfigError(f"Config file `{path}` must hold a mapping.")
        for key, value in values.items():
            if isinstance(value, (dict, list)):
                raise ConfigError(f"Config file `{path}`: key `{key}` must map to a scalar.")
        return {str(key): value for key, value in values.items()}

    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Config file `{path}` line {lineno}: expected `key=value`, got `{line}`.")
        values[key.strip()] = value.strip()
    return values


class DataclassArgumentParser(ArgumentParser):
    r"""
    `argparse` front-end generated from dataclass fields.

    One `--flag` exists per field name; a name declared by several dataclasses fills
    all of them. Values resolve, from lowest to highest precedence, as: dataclass
    default, `--config` file, trailing `key=value` overrides, explicit flags.
    Unknown keys are errors.
    """

    dataclass_types: List[type]

    def __init__(self, dataclass_types: Union[type, Iterable[type]], **kwargs):
        kwargs.setdefault("formatter_class", RawDescriptionHelpFormatter)
        kwargs.setdefault("allow_abbrev", False)
        kwargs.setdefault(
            "epilog",
            "Trailing KEY=VALUE arguments override config-file values for any field above.",
        )
        super().__init__(**kwargs)
        if dataclasses.is_dataclass(dataclass_types):
            dataclass_types = [dataclass_types]
        self.dataclass_types = list(dataclass_types)
        self.field_types: Dict[str, Any] = {}
        for dtype in self.dataclass_types:
            self._add_dataclass_arguments(dtype)

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")

    def _add_dataclass_arguments(self, dtype: type) -> None:
        type_hints = get_type_hints(dtype)
        group = self.add_argument_group(dtype.__name__)
        for field in dataclasses.fields(dtype):
            if not field.init:
                continue
            annotation = type_hints[field.name]
            if field.name in self.field_types:
                if self.field_types[field.name] != annotation:
                    raise ConfigError(f"Field `{field.name}` is declared with conflicting types.")
                continue
            self.field_types[field.name] = annotation
            self._add_field(group, field, annotation)

    @staticmethod
    def _add_field(group, field: dataclasses.Field, annotation) -> None:
        metadata = dict(field.metadata)
        if not metadata.get("help"):
            raise ConfigError(f"Field `{field.name}` has no help text.")
        aliases = metadata.get("aliases", [])
        if isinstance(aliases, str):
            aliases = [aliases]
        default = field.default if field.default is not dataclasses.MISSING else None
        kwargs = {"help": f"{metadata['help']} (default: {default})", "default": SUPPRESS, "dest": field.name}

        target, _ = _strip_optional(annotation)
        if get_origin(target) is Literal:
            kwargs["choices"] = list(get_args(target))
            kwargs["type"] = make_choice_type_function(kwargs["choices"])
        elif target is bool:
            kwargs["type"] = string_to_bool
            kwargs["nargs"] = "?"
            kwargs["const"] = True
        else:
            kwargs["type"] = target
        group.add_argument(f"--{field.name}", *aliases, **kwargs)

        if target is bool and field.default is True:
            group.add_argument(
                f"--no_{field.name}",
                action="store_false",
                dest=field.name,
                default=SUPPRESS,
                help=f"Disable `--{field.name}`.",
            )

    def coerce(self, name: str, raw: Any) -> Any:
        r"""Convert a config-file or override value to the field's declared type."""
        target, optional = _strip_optional(self.field_types[name])
        if optional and (raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none", "null"))):
            return None
        try:
            if get_origin(target) is Literal:
                choices = get_args(target)
                value = make_choice_type_function(list(choices))(str(raw))
                if value not in choices:
                    raise ValueError(f"must be one of {list(choices)}")
                return value
            if target is bool:
                return string_to_bool(raw)
            if target is int and isinstance(raw, float) and not raw.is_integer():
                raise ValueError("must be an integer")
            if target in (int, float, str):
                return target(raw)
        except (ValueError, ArgumentTypeError) as e:
            raise ConfigError(f"Invalid value `{raw}` for `{name}`: {e}")
        return raw

    def _known(self, values: Dict[str, Any], source: str) -> Dict[str, Any]:
        unknown = sorted(set(values) - set(self.field_types))
        if unknown:
            raise ConfigError(f"Unknown config key(s) in {source}: {unknown}.")
        return {key: self.coerce(key, value) for key, value in values.items()}

    def parse_argv(self, argv: List[str]) -> Tuple[Any, ...]:
        namespace, remaining = self.parse_known_args(argv)
        overrides = {}
        for item in remaining:
            key, sep, value = item.partition("=")
            if item.startswith("-") or not sep or not key:
                raise ConfigError(f"{self.prog}: unrecognized argument `{item}`.")
            overrides[key.strip()] = value.strip()
        overrides = self._known(overrides, "command-line overrides")
        explicit = vars(namespace)

        values: Dict[str, Any] = {}
        config_path = explicit.get("config", overrides.get("config"))
        if config_path:
            values.update(self._known(load_config_file(config_path), f"`{config_path}`"))
        values.update(overrides)
        values.update(explicit)
        return self.parse_dict(values)

    def parse_dict(self, args: Dict[str, Any], allow_extra_keys: bool = False) -> Tuple[Any, ...]:
        unused_keys = set(args.keys())
        outputs = []
        for dtype in self.dataclass_types:
            keys = {f.name for f in dataclasses.fields(dtype) if f.init}
            inputs = {k: v for k, v in args.items() if k in keys}
            unused_keys.difference_update(inputs.keys())
            try:
                obj = dtype(**inputs)
            except ConfigError:
                raise
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Invalid {dtype.__name__}: {e}")
            outputs.append(obj)
        if not allow_extra_keys and unused_keys:
            raise ConfigError(f"Some keys are not used by the argument parser: {sorted(unused_keys)}")
        return tuple(outputs)

    def parse_yaml_file(self, yaml_file: str, allow_extra_keys: bool = False) -> Tuple[Any, ...]:
        values = load_config_file(yaml_file)
        if not allow_extra_keys:
            values = self._known(values, f"`{yaml_file}`")
        return self.parse_dict(values, allow_extra_keys=allow_extra_keys)
