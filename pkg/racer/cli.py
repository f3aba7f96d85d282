import json
import os
import socket
import sys

import numpy as np
import yaml

from racer.averaging import AveragerBackend
from racer.center_configs import get_base_config
from racer.cli_parsing import COMMANDS, argparser_from_config
from racer.config_utils import flatten_dict, resolve_threads, update_config_from_args, update_nested
from racer.estimators import (CenteringConfig, cm_variance_landscape, gm_landscape, local_gm_landscape, normalize_nonneg, scm_center,
                              scm_landscape)
from racer.evaluation.benchmark import summarize, sweep
from racer.exceptions import ConfigurationError, DomainError, FormatError, NoMassError
from racer.io_formats import read_image, read_mrc, read_pgm, write_centers, write_mrc, write_pgm
from racer.prediction import StackCenterer
from racer.synthetic.noise import NoiseSpec, add_noise, snr
from racer.synthetic.scenes import PartialObject, SceneSpec, render_scene

EXIT_NO_MASS = 2
EXIT_FORMAT = 3
EXIT_CONFIGURATION = 4
# top-level keys a benchmark YAML file may override
BENCH_FILE_GROUPS = ("bench", "synth", "noise")


def centering_config(config):
    centering = config['centering']
    backend = AveragerBackend(centering['backend'], n_radial=centering['n_radial'], n_angular=centering['n_angular'],
                              ring_weights=centering['ring_weights'])
    return CenteringConfig(centering['radius'], tie_break=centering['tie_break'], backend=backend, normalize=centering['normalize'],
                           tie_tol=centering['tie_tol'], threads=config['orchestration']['threads'])


def scene_from_config(synth):
    partial = synth['partial']
    second = None
    if partial['offset'] is not None:
        second = PartialObject(tuple(partial['offset']), partial['object'], partial['radius'], partial['scale'], partial['visible'])
    raster = read_pgm(synth['raster']) if synth.get('raster') else None
    return SceneSpec(tuple(synth['extent']), synth['object'], synth['object_radius'], tuple(synth['shift']), second, raster)


def cmd_center(config):
    image = read_image(config['image'], config['slice_index'])
    result = scm_center(image, centering_config(config), initial_center=config['initial_center'])
    row, col = result.center
    if config['orchestration']['json']:
        print(json.dumps({"row": int(row), "col": int(col), "cost": result.cost_min, "e_max": result.e_max}))
    else:
        print(f"center: {row} {col}  cost: {result.cost_min:.10g}  e_max: {result.e_max:.10g}")
    return 0


def compute_landscape(image, kind, cfg, metric="composed"):
    if kind in ("scm", "scm-normalized"):
        return scm_landscape(image, cfg, "sCM" if kind == "scm" else "sCM-normalized")
    if cfg.normalize:
        image = normalize_nonneg(image)
    if kind == "gm":
        return gm_landscape(image, metric, cfg.tie_break, cfg.tie_tol)
    if kind == "local-gm":
        return local_gm_landscape(image, cfg.radius, metric, cfg.tie_break)
    return cm_variance_landscape(image, cfg.tie_break)


def cmd_landscape(config):
    image = read_image(config['image'], config['slice_index'])
    landscape = compute_landscape(image, config['kind'], centering_config(config), config['metric'])
    output = config['orchestration']['output']
    landscape.to_frame().to_csv(output if output else sys.stdout, index=False)
    row, col = landscape.argmin
    print(f"argmin: {row} {col}  cost: {landscape.cost_min:.10g}  kind: {landscape.kind}", file=sys.stderr)
    return 0


def _write_image(image, path, fmt):
    if fmt == "npy":
        np.save(path, image)
    elif fmt == "pgm":
        write_pgm(image, path, rescale=image.min() < 0 or image.max() > 1)
    else:
        write_mrc(image[None].astype(np.float32), path)


def cmd_synth(config):
    synth, noise, orchestration = config['synth'], config['noise'], config['orchestration']
    scene = scene_from_config(synth)
    clean, truth = render_scene(scene)
    noisy = add_noise(clean, NoiseSpec(noise['model'], noise['snr'], noise['seed']))
    out_dir = orchestration['output'] or "."
    os.makedirs(out_dir, exist_ok=True)
    suffix = {"npy": "npy", "pgm": "pgm", "mrc": "mrc"}[synth['format']]
    paths = {"clean": os.path.join(out_dir, f"clean.{suffix}"), "noisy": os.path.join(out_dir, f"noisy.{suffix}")}
    _write_image(clean, paths["clean"], synth['format'])
    _write_image(noisy, paths["noisy"], synth['format'])
    sidecar = {
        "truth": [int(truth[0]), int(truth[1])],
        "object_center": list(scene.center),
        "extent": list(scene.extent),
        "object": scene.object,
        "object_radius": scene.object_radius,
        "noise_model": noise['model'],
        "target_snr": noise['snr'],
        "measured_snr": snr(clean, noisy),
        "seed": noise['seed'],
    }
    paths["truth"] = os.path.join(out_dir, "truth.json")
    with open(paths["truth"], "w") as f:
        json.dump(sidecar, f, indent=2)
    if orchestration['json']:
        print(json.dumps(paths))
    else:
        for name, path in paths.items():
            print(f"{name}: {path}")
    return 0


def load_bench_file(path):
    with open(path) as f:
        overrides = yaml.safe_load(f) or {}
    if not isinstance(overrides, dict):
        raise ConfigurationError(f"{path}: a benchmark configuration is a mapping with keys {', '.join(BENCH_FILE_GROUPS)}")
    unknown = [key for key in overrides if key not in BENCH_FILE_GROUPS]
    if unknown:
        raise ConfigurationError(f"{path}: unknown configuration groups {unknown}, allowed are {', '.join(BENCH_FILE_GROUPS)}")
    return overrides


def _run_sweep(config):
    bench = config['bench']
    return sweep(scene_from_config(config['synth']), bench['noise_models'], bench['snr_grid'], bench['methods'], bench['n_seeds'],
                 bench['radius'], base_seed=config['noise']['seed'], threads=config['orchestration']['threads'],
                 max_shift=bench['max_shift'], lowpass_sigma=bench['lowpass_sigma'], record_runtime=bench['record_runtime'],
                 verbose=config['orchestration']['verbose'])


def cmd_bench(config):
    update_nested(config, load_bench_file(config['config']))
    if config['seed'] is not None:
        config['noise']['seed'] = config['seed']
    orchestration = config['orchestration']

    mlflow_hostname = os.environ.get("MLFLOW_HOSTNAME", None)
    if orchestration['no_mlflow'] or mlflow_hostname is None:
        print("Not logging run with mlflow, set MLFLOW_HOSTNAME environment to variable enable mlflow.", file=sys.stderr)
        table = _run_sweep(config)
        summary = summarize(table)
    else:
        import mlflow
        print(f"Logging run with mlflow at host {mlflow_hostname}", file=sys.stderr)
        mlflow.set_tracking_uri(f"http://{mlflow_hostname}:5000")
        mlflow.set_experiment(orchestration['experiment'])
        with mlflow.start_run():
            mlflow.log_param('hostname', socket.gethostname())
            mlflow.log_params(flatten_dict({group: config[group] for group in BENCH_FILE_GROUPS}))
            table = _run_sweep(config)
            summary = summarize(table)
            for row in summary.itertuples():
                mlflow.log_metric(f"{row.method}/{row.noise_model}/snr_{row.snr:g}/mean_dev", row.mean)

    output = orchestration['output']
    table.to_csv(output if output else sys.stdout, index=False)
    print(summary.to_string(index=False), file=sys.stderr)
    return 0


def cmd_stack_center(config):
    stack = read_mrc(config['stack'])
    centering, rfa, orchestration = config['centering'], config['rfa'], config['orchestration']
    centerer = StackCenterer(radius=centering['radius'], method=config['method'], backend=centering['backend'], tie_break=centering['tie_break'],
                             normalize=centering['normalize'], n_radial=centering['n_radial'], n_angular=centering['n_angular'],
                             ring_weights=centering['ring_weights'], tie_tol=centering['tie_tol'], n_jobs=orchestration['threads'],
                             rfa_max_iters=rfa['max_iters'], rfa_tol=rfa['tol'], max_shift=rfa['max_shift'], verbose=orchestration['verbose'])
    centerer.fit(stack.images)
    output = orchestration['output']
    write_centers(centerer.results_, output if output else sys.stdout)
    if config['apply_shift']:
        write_mrc(centerer.transform(stack.images), config['apply_shift'])
    summary = centerer.shift_summary()
    print(f"mean shift: {summary['mean_shift']:.3f}  median shift: {summary['median_shift']:.3f}  particles: {summary['n_particles']}",
          file=sys.stderr)
    return 0


COMMAND_HANDLERS = {
    "center": cmd_center,
    "landscape": cmd_landscape,
    "synth": cmd_synth,
    "bench": cmd_bench,
    "stack-center": cmd_stack_center,
}


def main(argv):
    """Run one racer command and return its exit code.

    0 on success, 2 when the image has no mass, 3 for unreadable or malformed files and
    4 for invalid parameters.
    """
    if not argv or argv[0] not in COMMANDS:
        print(f"usage: racer {{{','.join(COMMANDS)}}} ...", file=sys.stderr)
        return EXIT_CONFIGURATION
    command = argv[0]
    try:
        config = get_base_config()
        parser = argparser_from_config(config, command)
        args = parser.parse_args(argv[1:])
        config = update_config_from_args(config, args)
        # promote general group to top level
        config.update(config.pop('general', {}))
        config['orchestration']['threads'] = resolve_threads(config['orchestration']['threads'])
        return COMMAND_HANDLERS[command](config)
    except NoMassError as e:
        print(f"racer {command}: {e}", file=sys.stderr)
        return EXIT_NO_MASS
    except (FormatError, OSError) as e:
        print(f"racer {command}: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except (ConfigurationError, DomainError) as e:
        print(f"racer {command}: {e}", file=sys.stderr)
        return EXIT_CONFIGURATION


def run():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
