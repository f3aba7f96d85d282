import argparse

from racer.averaging import BACKENDS, RING_WEIGHTS
from racer.config_utils import str2bool
from racer.estimators import METRICS, TIE_BREAKS
from racer.exceptions import ConfigurationError
from racer.synthetic.noise import NOISE_MODELS
from racer.synthetic.scenes import OBJECTS

COMMANDS = ("center", "landscape", "synth", "bench", "stack-center")
LANDSCAPE_KINDS = ("scm", "scm-normalized", "gm", "local-gm", "cm-variance")


class GroupedArgParser(argparse.ArgumentParser):
    # This extends the argparse.ArgumentParser to allow for nested namespaces via groups
    # nesting of groups is done by giving them names with dots in them

    def parse_args(self, argv):
        results = super().parse_args(argv)
        nested_by_groups = argparse.Namespace()
        for group in self._action_groups:
            # group could have been created if we saw a nested group first
            new_subnamespace = getattr(nested_by_groups, group.title, argparse.Namespace())
            # flags of a nested group carry its name as a dest prefix, e.g. partial_object in synth.partial
            prefix = group.title.split(".")[-1] + "_" if "." in group.title else None
            for action in group._group_actions:
                if action.dest is not argparse.SUPPRESS and hasattr(results, action.dest):
                    key = action.dest[len(prefix):] if prefix and action.dest.startswith(prefix) else action.dest
                    setattr(new_subnamespace, key, getattr(results, action.dest))
            if new_subnamespace != argparse.Namespace():
                parts = group.title.split(".")
                parent_namespace = nested_by_groups
                for part in parts[:-1]:
                    if not hasattr(parent_namespace, part):
                        setattr(parent_namespace, part, argparse.Namespace())
                    parent_namespace = getattr(parent_namespace, part)
                setattr(parent_namespace, parts[-1], new_subnamespace)

        return nested_by_groups

    def error(self, message):
        # usage errors are configuration errors (exit code 4), not argparse's exit code 2
        raise ConfigurationError(f"{self.prog}: {message}")


def _add_centering(parser, config, radius_required=True):
    centering = parser.add_argument_group('centering')
    centering.add_argument('-r', '--radius', type=int, help='upper bound R on the object radius in pixels', required=radius_required,
                           default=config['radius'])
    centering.add_argument('--backend', choices=BACKENDS, default=config['backend'], help='rotational averaging backend')
    centering.add_argument('--tie-break', choices=TIE_BREAKS, default=config['tie_break'], help='rule for choosing among tied minimizers')
    centering.add_argument('--normalize', type=str2bool, default=config['normalize'], help='subtract the image minimum before centering')
    centering.add_argument('--tie-tol', type=float, default=config['tie_tol'], help='relative tolerance for tied costs')
    centering.add_argument('--n-radial', type=int, default=config['n_radial'], help='radial samples of the polar backend, default 2R')
    centering.add_argument('--n-angular', type=int, default=config['n_angular'], help='angular samples of the polar backend')
    centering.add_argument('--ring-weights', choices=RING_WEIGHTS, default=config['ring_weights'],
                           help='how the polar backend integrates angular means onto rings')


def _add_orchestration(parser, config):
    orchestration = parser.add_argument_group('orchestration')
    orchestration.add_argument('-t', '--threads', type=int, default=config['threads'], help='worker threads, falls back to RACER_THREADS')
    orchestration.add_argument('-o', '--output', default=config['output'], help='output file or directory')
    orchestration.add_argument('--json', action='store_true', default=config['json'], help='machine-readable output on stdout')
    orchestration.add_argument('-v', '--verbose', action='store_true', default=config['verbose'])
    return orchestration


def argparser_from_config(config, command):
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}, choose one of {', '.join(COMMANDS)}")
    parser = GroupedArgParser(prog=f"racer {command}", description="Robust translational centering of noisy images")
    general = parser.add_argument_group('general')

    if command in ("center", "landscape"):
        general.add_argument('image', help='input image (.pgm, .mrc, .mrcs or .npy)')
        general.add_argument('--slice', type=int, default=0, help='slice of an MRC stack to use', dest='slice_index')
        _add_centering(parser, config['centering'])
        if command == "center":
            general.add_argument('--initial-center', type=int, nargs=2, metavar=('ROW', 'COL'), default=None,
                                 help='rough center; the search is restricted to the (4R+1)x(4R+1) window around it')
        else:
            general.add_argument('-k', '--kind', choices=LANDSCAPE_KINDS, default='scm')
            general.add_argument('--metric', choices=METRICS, default='composed', help='ground metric of the GM kinds')
        _add_orchestration(parser, config['orchestration'])

    elif command == "stack-center":
        general.add_argument('stack', help='MRC mode-2 particle stack')
        general.add_argument('--method', choices=('scm', 'rfa', 'cm'), default='scm')
        general.add_argument('--apply-shift', default=None, metavar='OUT.mrcs', help='write the stack shifted so every center lands on the window center')
        _add_centering(parser, config['centering'])
        rfa = parser.add_argument_group('rfa')
        rfa.add_argument('--rfa-max-iters', type=int, default=config['rfa']['max_iters'], dest='max_iters')
        rfa.add_argument('--rfa-tol', type=float, default=config['rfa']['tol'], dest='tol')
        rfa.add_argument('--max-shift', type=int, default=config['rfa']['max_shift'])
        _add_orchestration(parser, config['orchestration'])

    elif command == "synth":
        synth = parser.add_argument_group('synth')
        synth_config = config['synth']
        synth.add_argument('--extent', type=int, nargs=2, metavar=('ROWS', 'COLS'), default=synth_config['extent'])
        synth.add_argument('--object', choices=OBJECTS, default=synth_config['object'])
        synth.add_argument('--object-radius', type=int, default=synth_config['object_radius'])
        synth.add_argument('--raster', default=None, help='PGM silhouette for --object raster')
        synth.add_argument('--shift', type=int, nargs=2, metavar=('DROW', 'DCOL'), default=synth_config['shift'])
        synth.add_argument('--format', choices=('pgm', 'mrc', 'npy'), default='npy')
        partial = parser.add_argument_group('synth.partial')
        partial_config = synth_config['partial']
        partial.add_argument('--partial-offset', type=int, nargs=2, metavar=('DROW', 'DCOL'), default=partial_config['offset'], dest='partial_offset',
                             help='add a second, truncated object at this offset from the main one')
        partial.add_argument('--partial-object', choices=OBJECTS[:-1], default=partial_config['object'], dest='partial_object')
        partial.add_argument('--partial-radius', type=int, default=partial_config['radius'], dest='partial_radius')
        partial.add_argument('--partial-scale', type=float, default=partial_config['scale'], dest='partial_scale')
        partial.add_argument('--partial-visible', type=float, default=partial_config['visible'], dest='partial_visible')
        noise = parser.add_argument_group('noise')
        noise.add_argument('--noise-model', choices=NOISE_MODELS, default=config['noise']['model'], dest='model')
        noise.add_argument('--snr', type=float, default=config['noise']['snr'])
        noise.add_argument('--seed', type=int, default=config['noise']['seed'])
        _add_orchestration(parser, config['orchestration'])

    else:
        general.add_argument('config', help='YAML benchmark configuration')
        general.add_argument('--seed', type=int, default=None, help='base seed of the noise streams, overrides the configuration file')
        orchestration = _add_orchestration(parser, config['orchestration'])
        orchestration.add_argument('--experiment', help="Name of mlflow experiment", default=config['orchestration']['experiment'])
        orchestration.add_argument('--no-mlflow', help="whether to use mlflow", action='store_true')

    return parser
