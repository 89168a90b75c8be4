"""
AUTOPRIV command line
autopriv [--config FILE] [--seed N] [--workers N] [--verbose] <command> ...
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from autopriv import __version__
from autopriv.config import PipelineConfig
from autopriv.corpus import generate_corpus
from autopriv.csv_data_manager import CSVDataManager
from autopriv.errors import AutoprivError
from autopriv.pipeline import (build_metadataset, cmd_recommend, compare_evaluations, median_linkability,
                               resolve_target, run_attack, run_evaluate, run_meta_fit, run_protect,
                               summarize_recommendation)
from autopriv.riskprofile import QISet, equivalence_classes, sample_qi_sets
from autopriv.tabular import load_csv
from autopriv.utils import derive_seed, setup_logging

logger = logging.getLogger('autopriv')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='autopriv',
                                     description='Privacy configuration recommendation for tabular data')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--config', type=Path, help='key = value settings file (or setting_name,setting_value CSV)')
    parser.add_argument('--seed', type=int, help='master seed (overrides the configuration)')
    parser.add_argument('--workers', type=int, help='worker count (overrides the configuration)')
    parser.add_argument('--out', type=Path, help='output directory (overrides out_dir)')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    profile = commands.add_parser('profile', help='k-anonymity risk profile of a CSV')
    profile.add_argument('csv', type=Path)
    profile.add_argument('--target', help='target column (default: last column)')
    profile.add_argument('--qi', help='comma-separated QI columns (default: sample qi_count sets)')

    commands.add_parser('protect', help='holdout split, QI sets and protected variants')
    evaluate = commands.add_parser('evaluate', help='learner search on variants and originals')
    evaluate.add_argument('--optimizer', help='grid, random, sh, hyperband or oracle')
    commands.add_parser('attack', help='linkability of every variant')
    meta_build = commands.add_parser('meta-build', help='assemble the meta-dataset')
    meta_build.add_argument('--optimizer', help='evaluation table to join (default: configured optimizer)')
    commands.add_parser('meta-fit', help='fit the performance and linkability meta-models')

    rec = commands.add_parser('recommend', help='rank privacy configurations for a new dataset')
    rec.add_argument('csv', type=Path)
    rec.add_argument('--target', help='target column (default: last column)')
    rec.add_argument('--top-n', type=int, help='number of configurations to report')
    rec.add_argument('--name', help='report name (default: file stem)')
    rec.add_argument('--xlsx', action='store_true', help='also write an Excel report')

    compare = commands.add_parser('compare', help='Bayes sign test between two evaluation tables')
    compare.add_argument('evaluations', type=Path, nargs='+', help='one table with --against-original, else two')
    compare.add_argument('--metric', default='test_auc', choices=('test_auc', 'cv_auc_mean'))
    compare.add_argument('--by', choices=('technique',), help='one test per technique')
    compare.add_argument('--against-original', action='store_true',
                         help='compare each variant with its dataset baseline in the same table')
    compare.add_argument('--mc-samples', type=int, default=50_000)

    corpus = commands.add_parser('corpus', help='write the bundled synthetic corpus')
    corpus.add_argument('--out', dest='corpus_out', type=Path, help='destination (default: corpus_dir)')
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {'master_seed': args.seed, 'worker_count': args.workers,
                 'out_dir': str(args.out) if args.out else None}
    if getattr(args, 'optimizer', None):
        overrides['optimizer'] = args.optimizer
    if getattr(args, 'top_n', None):
        overrides['top_n'] = args.top_n
    return cfg.with_overrides(**overrides)


def _json_default(value):
    if hasattr(value, 'item'):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))


def _profile(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    ds = load_csv(args.csv, resolve_target(args.csv, args.target or cfg.target))
    if args.qi:
        qi_sets = [QISet(0, tuple(name.strip() for name in args.qi.split(',') if name.strip()))]
    else:
        qi_sets = sample_qi_sets(ds, cfg.qi_count, cfg.qi_fraction, derive_seed(cfg.master_seed, ds.name, 'qi_sets'))
    _print_json({'dataset': ds.name, 'profiles': [equivalence_classes(ds, q).to_report() for q in qi_sets]})


def _recommend(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    result = cmd_recommend(cfg, args.csv, args.target, args.name, args.xlsx)
    print('=' * 80)
    print(f"[REPORT] Top {len(result)} privacy configurations for {result.dataset}")
    print('=' * 80)
    for line in summarize_recommendation(result):
        print(line)
    manager = CSVDataManager(cfg.out_dir)
    if manager.attacks_path.is_file():
        median = median_linkability(manager, result)
        if median is not None:
            print(f"[REPORT] Median measured linkability of the recommended configurations: {median:.4f}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        setup_logging(cfg.out_dir / 'logs', verbose=args.verbose)
        if args.command == 'profile':
            _profile(cfg, args)
        elif args.command == 'protect':
            run_protect(cfg)
        elif args.command == 'evaluate':
            run_evaluate(cfg)
        elif args.command == 'attack':
            record = run_attack(cfg)
            _print_json({'phase': record.phase, **record.details, 'reports': record.rows})
        elif args.command == 'meta-build':
            build_metadataset(cfg)
        elif args.command == 'meta-fit':
            run_meta_fit(cfg)
        elif args.command == 'recommend':
            _recommend(cfg, args)
        elif args.command == 'compare':
            if not args.against_original and len(args.evaluations) != 2:
                raise AutoprivError('compare needs exactly two evaluation tables')
            second = args.evaluations[1] if len(args.evaluations) > 1 else None
            _print_json(compare_evaluations(args.evaluations[0], second, metric=args.metric, by=args.by,
                                            against_original=args.against_original,
                                            mc_samples=args.mc_samples, seed=cfg.master_seed))
        elif args.command == 'corpus':
            generate_corpus(args.corpus_out or cfg.corpus_dir, seed=cfg.master_seed)
    except AutoprivError as exc:
        logger.error(f"[ERROR] {exc}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
