import json
import logging
from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from shooting.models import HorizonSettings


logger = logging.getLogger(__name__)


def load_config(path):
    '''
    Read a JSON config file: an object whose keys are flag names with
    underscores instead of dashes.

    Raises:
        ValidationError: unreadable file or not a JSON object.
    '''
    if not path:
        return {}
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except (OSError, ValueError) as exc:
        raise serializers.ValidationError({'config': [f"Cannot read {path}: {exc}"]})
    if not isinstance(data, dict):
        raise serializers.ValidationError({'config': ["The config file must hold a JSON object."]})
    return data


def merge_options(fields, options, file_values):
    '''
    One payload from flags and config file: a flag that was given wins over
    the file; anything in neither is left to the serializer defaults, which
    read settings.

    Raises:
        ValidationError: config keys that match no option.
    '''
    unknown = sorted(set(file_values) - set(fields))
    if unknown:
        raise serializers.ValidationError({key: ["Unknown option."] for key in unknown})
    merged = {}
    for name in fields:
        if options.get(name) is not None:
            merged[name] = options[name]
        elif name in file_values:
            merged[name] = file_values[name]
    return merged


def horizon_from(config):
    '''HorizonSettings from the t_max / rel_tol / abs_tol options of a command.'''
    return HorizonSettings(t_max=config.get('t_max'), rel_tol=config.get('rel_tol'),
                           abs_tol=config.get('abs_tol'))


def scan_kwargs(config):
    '''Keyword arguments of scan_solutions taken from a command config.'''
    return {
        'scan_range': config.get('scan_range'),
        'scan_step': config.get('scan_step'),
        'bc_tol': config.get('bc_tol'),
        'unbounded_ok': config.get('unbounded_ok', True),
        'horizon': horizon_from(config),
    }


def output_path(config, name):
    directory = Path(config['output_dir'])
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def envelope(command, **payload):
    '''The top-level object of every JSON output.'''
    return {'spec_version': settings.SPEC_VERSION, 'command': command, 'status': 'ok', **payload}


def write_json(config, name, payload):
    '''Byte-stable JSON: sorted keys, fixed indentation, trailing newline.'''
    path = output_path(config, name)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + '\n', encoding='utf-8')
    logger.debug(f'Wrote {path}')
    return path


def write_text(config, name, text):
    path = output_path(config, name)
    path.write_text(text, encoding='utf-8')
    logger.debug(f'Wrote {path}')
    return path


def records_to_csv(rows):
    '''CSV table of SolutionRecord JSON rows (scalar fields only).'''
    columns = ['family', 'm', 'gamma', 'free_value', 'bounded', 'lambda', 'shape',
               'growth_exponent', 'decay_exponent', 'termination', 'kind', 'residual']

    def cell(value):
        if value is None:
            return ''
        if isinstance(value, float):
            return f'{value:.17g}'
        return str(value)

    lines = [','.join(columns)]
    lines += [','.join(cell(row[c]) for c in columns) for row in rows]
    return '\n'.join(lines) + '\n'
