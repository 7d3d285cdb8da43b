import argparse
import logging
import sys
from typing import List, Optional

from src.cli import HPStudy
from src.cli.config import FORMATS, REFERENCE_MODES
from src.core.exceptions import HPError
from src.core.utils import DEFAULT_CONFIG_PATH
from src.probes.suite import PROBE_NAMES

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hp-study",
        description="hp-FEM on spectral boundary layer meshes for singularly perturbed reaction-diffusion")
    parser.add_argument('--config', default=DEFAULT_CONFIG_PATH, help='Path to the study configuration')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Debug logging')
    verbosity.add_argument('--quiet', action='store_true', help='Warnings and errors only')
    commands = parser.add_subparsers(dest='command', required=True)

    study = commands.add_parser('study', help='Run the (p, eps) convergence study')
    study.add_argument('--example', choices=['constant', 'peak', 'zero'], help='Right-hand side')
    study.add_argument('--eps', type=float, nargs='+', help='Values of eps (columns, in order)')
    study.add_argument('--pmin', type=int, help='Smallest polynomial degree')
    study.add_argument('--pmax', type=int, help='Largest polynomial degree')
    study.add_argument('--lambda', dest='lam', type=float, help='Layer width factor lambda')
    study.add_argument('--sigma', type=float, help='Geometric grading factor')
    study.add_argument('--format', choices=FORMATS, help='Table format')
    study.add_argument('--out', help='Output directory')
    study.add_argument('--quick', action='store_true', help='Reduced grid (p <= 5, three eps values)')
    study.add_argument('--seed', type=int, help='Seed recorded with the run')
    study.add_argument('--no-reference', action='store_true', help='Skip reference solutions and errors')
    study.add_argument('--reference-mode', choices=REFERENCE_MODES, help='Reference solution placement')
    study.add_argument('--cache-dir', help='Directory for cached reference solutions')
    study.add_argument('--patterns', help='Pattern assignment YAML')
    study.add_argument('--method', choices=['cholesky', 'cg'], help='Linear solver')

    mesh = commands.add_parser('mesh', help='Generate the L-shape mesh and check conformity')
    mesh.add_argument('--dump', default='-', help='JSON output path ("-" for stdout)')
    mesh.add_argument('--p', type=int, default=1, help='Polynomial degree')
    mesh.add_argument('--eps', type=float, default=1e-2, help='Perturbation parameter')
    mesh.add_argument('--lambda', dest='lam', type=float, help='Layer width factor lambda')
    mesh.add_argument('--sigma', type=float, help='Geometric grading factor')
    mesh.add_argument('--layers', type=int, nargs='+', help='Refinement depth (one value or one per macro)')

    probes = commands.add_parser('probes', help='Numerical checks of the polynomial inequalities')
    probes.add_argument('--all', action='store_true', help='Run every probe')
    for name in PROBE_NAMES:
        flag = 'lemma' if name == 'lemma21' else name
        probes.add_argument(f'--{flag}', dest=name, action='store_true', help=f'Run the {name} probe')
    probes.add_argument('--out', default='-', help='CSV output path ("-" for stdout)')
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)


def _run_study(hp: HPStudy, args: argparse.Namespace) -> int:
    config = hp.study_config(
        quick=args.quick, example=args.example, eps_list=args.eps, p_min=args.pmin, p_max=args.pmax,
        lam=args.lam, sigma=args.sigma, format=args.format, output_dir=args.out, seed=args.seed,
        reference=False if args.no_reference else None, reference_mode=args.reference_mode,
        cache_dir=args.cache_dir, patterns_file=args.patterns, solver_method=args.method)
    result = hp.run(config)
    if result.failures:
        logger.warning(f"{len(result.failures)} of {len(result.reports)} cells failed")
    print(f"Study complete! Results saved to: {config.output_dir}")
    return 0


def _run_mesh(hp: HPStudy, args: argparse.Namespace) -> int:
    mesh, report = hp.build_mesh(args.p, args.eps, lam=args.lam, sigma=args.sigma, layers=args.layers)
    text = mesh.to_json(report)
    if args.dump == '-':
        print(text)
    else:
        with open(args.dump, 'w') as f:
            f.write(text)
        logger.info(f"Mesh written to {args.dump}")
    return 0 if report.passed else 1


def _run_probes(hp: HPStudy, args: argparse.Namespace) -> int:
    names = None if args.all else [name for name in PROBE_NAMES if getattr(args, name)]
    if names == []:
        names = None
    results = hp.probes(names=names)
    if args.out == '-':
        sys.stdout.write(hp.probes_frame(results).to_csv(index=False, lineterminator="\n"))
    else:
        hp.write_probes(results, args.out)
    return 0


COMMANDS = {'study': _run_study, 'mesh': _run_mesh, 'probes': _run_probes}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    hp = HPStudy(args.config)
    try:
        return COMMANDS[args.command](hp, args)
    except HPError as e:
        logger.error(str(e))
        return 2


if __name__ == '__main__':
    sys.exit(main())
