"""Configuration builder: section registration, YAML files and dotted CLI overrides."""

from argparse import ArgumentParser
from pathlib import Path
from typing import Any, Literal, get_args, get_origin

import yaml
from pydantic import BaseModel, Field, ValidationError, create_model

from redor.core import config as config_module
from redor.core.config import Config
from redor.core.redor_error import UsageError


def _add_model_arguments(parser: ArgumentParser, model: type[BaseModel], prefix: str = "") -> None:
    """Recursively add arguments for all fields in a Pydantic model."""
    for field_name, field_info in model.model_fields.items():
        arg_name = f"{prefix}.{field_name}" if prefix else field_name
        # argparse would turn dots into underscores; keep the structure in the dest
        dest_name = arg_name.replace(".", "__")
        field_type = field_info.annotation

        if isinstance(field_type, type) and issubclass(field_type, BaseModel):
            _add_model_arguments(parser, field_type, arg_name)
            continue

        origin = get_origin(field_type)
        if origin is Literal:
            choices = list(get_args(field_type))
            parser.add_argument(
                f"--{arg_name}",
                type=type(choices[0]),
                choices=choices,
                dest=dest_name,
                default=None,
                help=f"{field_info.description or field_name} (default: {field_info.default})",
            )
            continue
        # Optional[X] / X | None
        if origin is not None and origin is not list:
            args = get_args(field_type)
            non_none = [a for a in args if a is not type(None)]
            if non_none:
                field_type = non_none[0]

        help_text = f"{field_info.description or field_name} (default: {field_info.default})"
        if field_type is bool:
            parser.add_argument(
                f"--{arg_name}",
                action="store_true",
                dest=dest_name,
                default=None,
                help=help_text,
            )
            parser.add_argument(
                f"--no-{arg_name}",
                action="store_false",
                dest=dest_name,
                help=f"Disable {field_name}",
            )
        elif field_type is list or origin is list:
            item_types = get_args(field_type)
            item_type = item_types[0] if item_types else str
            parser.add_argument(
                f"--{arg_name}",
                type={int: int, float: float}.get(item_type, str),
                nargs="+",
                dest=dest_name,
                default=None,
                help=help_text,
            )
        else:
            arg_type = {int: int, float: float}.get(field_type, str)  # type: ignore[arg-type]
            parser.add_argument(
                f"--{arg_name}",
                type=arg_type,
                dest=dest_name,
                default=None,
                help=help_text,
            )


def _flat_to_nested_dict(
    flat: dict[str, Any], model: type[BaseModel], prefix: str = ""
) -> dict[str, Any]:
    """Convert flat argparse namespace dict to nested dict matching model structure."""
    nested: dict[str, Any] = {}

    for field_name, field_info in model.model_fields.items():
        arg_key = f"{prefix}__{field_name}" if prefix else field_name
        field_type = field_info.annotation

        if isinstance(field_type, type) and issubclass(field_type, BaseModel):
            nested_dict = _flat_to_nested_dict(flat, field_type, arg_key)
            if nested_dict:
                nested[field_name] = nested_dict
        elif arg_key in flat and flat[arg_key] is not None:
            nested[field_name] = flat[arg_key]

    return nested


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Recursive merge: override values take precedence, nested dicts are merged."""
    result = base.copy()
    for k, v in override.items():
        if k in result and isinstance(result[k], dict) and isinstance(v, dict):
            result[k] = _merge(result[k], v)
        else:
            result[k] = v
    return result


def add_config(name: str, config_class: type[BaseModel]) -> None:
    """Register a configuration section on the global redor config.

    Each call adds a new section while preserving the sections (and their
    current values) registered by earlier calls.

    Args:
        name: Attribute name of the section, e.g. ``"train"``.
        config_class: Pydantic model holding the section's fields and defaults.
    """
    existing_fields: dict[str, Any] = {}
    current_config = config_module.DEFAULT_CONFIG
    if current_config is not None:
        base_fields = set(Config.model_fields.keys())
        for field_name, field_info in type(current_config).model_fields.items():
            if field_name in base_fields or field_name == name:
                continue
            current_value = getattr(current_config, field_name)
            existing_fields[field_name] = (
                field_info.annotation,
                Field(default_factory=lambda v=current_value: v.model_copy()),
            )

    all_fields = {**existing_fields, name: (config_class, Field(default_factory=config_class))}
    dynamic_config = create_model(  # type: ignore[call-overload]
        "RedorConfig",
        __base__=Config,
        **all_fields,
    )
    config_module.DEFAULT_CONFIG = dynamic_config()


def config_argument_parser(parser: ArgumentParser | None = None) -> ArgumentParser:
    """Add a ``--section.field`` flag for every registered config field."""
    parser = parser if parser is not None else ArgumentParser(description="redor config")
    _add_model_arguments(parser, type(config_module.DEFAULT_CONFIG))
    return parser


def build_config(
    config_file: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    install: bool = True,
) -> Any:
    """Build a validated config from defaults, a YAML file and flat CLI overrides.

    Args:
        config_file: Optional YAML file with one mapping per section.
        overrides: Flat argparse namespace (``section__field`` keys); ``None``
            values are ignored.
        install: Replace ``DEFAULT_CONFIG`` with the result.

    Returns:
        The validated config instance.

    Raises:
        UsageError: The file is missing or malformed, or a value is out of range.
    """
    model = type(config_module.DEFAULT_CONFIG)
    merged: dict[str, Any] = model().model_dump()

    if config_file is not None:
        path = Path(config_file)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as e:
            raise UsageError(f"config file {path} is not valid YAML: {e}") from e
        if not isinstance(loaded, dict):
            raise UsageError(f"config file {path} must contain a mapping of sections")
        unknown = sorted(set(loaded) - set(model.model_fields))
        if unknown:
            raise UsageError(f"unknown config sections in {path}: {', '.join(unknown)}")
        merged = _merge(merged, loaded)

    if overrides:
        merged = _merge(merged, _flat_to_nested_dict(overrides, model))

    try:
        config_instance = model.model_validate(merged)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}") from e

    if install:
        config_module.DEFAULT_CONFIG = config_instance
    return config_instance
