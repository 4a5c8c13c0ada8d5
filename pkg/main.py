import argparse
import json as jsonlib
import logging
import os
import sys

from pythonjsonlogger import json

from numerics.NumericsError import ConfigError, UnidentError
from numerics.Tolerances import Tolerances
from workflows.AnalyzeWorkflow import AnalyzeWorkflow
from workflows.AttackWorkflow import AttackWorkflow
from workflows.DesignWorkflow import DesignWorkflow
from workflows.LqrWorkflow import LqrWorkflow
from workflows.MonteCarloWorkflow import MonteCarloWorkflow
from workflows.RunConfig import RunConfig
from workflows.SelfTestWorkflow import SelfTestWorkflow
from workflows.SimulateWorkflow import SimulateWorkflow

WORKFLOWS = {
    'analyze': AnalyzeWorkflow,
    'design': DesignWorkflow,
    'lqr': LqrWorkflow,
    'simulate': SimulateWorkflow,
    'attack': AttackWorkflow,
    'montecarlo': MonteCarloWorkflow,
    'selftest': SelfTestWorkflow,
}


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class CommandFilter(logging.Filter):
    def __init__(self, command):
        super().__init__()
        self.command = command

    def filter(self, record):
        record.command = getattr(record, 'command', self.command)
        if not hasattr(record, 'json'):
            record.json = {}
        return True


def setup_logging(command):
    # Remove all existing handlers to prevent duplicate logging
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    root_logger.setLevel(os.getenv('LOG_LEVEL', 'INFO').upper())

    # stdout carries results, logs go to stderr
    log_handler = logging.StreamHandler(sys.stderr)
    formatter = json.JsonFormatter(
        '%(asctime)s %(levelname)s %(message)s %(command)s %(json)s'
    )
    log_handler.setFormatter(formatter)
    log_handler.addFilter(CommandFilter(command))
    root_logger.addHandler(log_handler)

    logger = logging.getLogger(__name__)
    logger.propagate = True
    return logger


def weight(text):
    """A scalar weight or a JSON matrix such as '[[1,0],[0,2]]'."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return jsonlib.loads(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or a JSON matrix, got {text!r}")


def int_list(text):
    try:
        return [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def window(text):
    values = int_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 't1,tT', got {text!r}")
    return tuple(values)


def dims(text):
    values = int_list(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected 'p,l,m', got {text!r}")
    return tuple(values)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=int(os.getenv('UNIDENT_SEED', 0)))
    common.add_argument('--output', help='write the result here instead of stdout')
    common.add_argument('--json-errors', action='store_true', help='report errors as JSON on stderr')
    common.add_argument('--rank-eps', type=float, default=Tolerances.rank_eps)
    common.add_argument('--residual-eps', type=float, default=Tolerances.residual_eps)

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument('--system', help='system JSON with A, B, C and an optional mask')

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument('--q', type=weight, default=1.0, help='output weight Q')
    weights.add_argument('--r', type=weight, default=1.0, help='input weight R')

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument('--w-amp', type=float, default=0.0, help='process noise amplitude')
    noise.add_argument('--v-amp', type=float, default=0.0, help='measurement noise amplitude')

    parser = ArgumentParser(prog='unident', description='Identifiability analysis and low-rank LQR design')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    analyze = sub.add_parser('analyze', parents=[common, system])
    analyze.add_argument('--trajectory', help='CSV with u_* columns')
    analyze.add_argument('--random-input', action='store_true')
    analyze.add_argument('--rank-input', type=int)
    analyze.add_argument('--horizon', type=int, default=50)
    analyze.add_argument('--no-rank-check', dest='rank_check', action='store_false')
    analyze.add_argument('--export-bundle', help='directory for W, F, H, Ja CSVs')

    design = sub.add_parser('design', parents=[common, system, weights])
    design.add_argument('--rank', type=int)
    design.add_argument('--snapshot-runs', type=int)
    design.add_argument('--snapshot-window', type=window)
    design.add_argument('--force-pod', action='store_true')
    design.add_argument('--no-refine', dest='refine', action='store_false')

    lqr = sub.add_parser('lqr', parents=[common, system, weights])
    lqr.add_argument('--q-terminal', type=weight)
    lqr.add_argument('--finite-horizon', type=int)

    simulate = sub.add_parser('simulate', parents=[common, system, noise])
    simulate.add_argument('--controller', help='controller JSON from design or lqr')
    simulate.add_argument('--steps', type=int, default=1000)
    simulate.add_argument('--dither', type=float, default=0.0)
    simulate.add_argument('--rank-input', type=int, help='open-loop input rank when no controller is given')

    attack = sub.add_parser('attack', parents=[common, system])
    attack.add_argument('--trajectory')
    attack.add_argument('--method', choices=('markov', 'graddesc'), default='markov')
    attack.add_argument('--train', type=int)
    attack.add_argument('--test', type=int)
    attack.add_argument('--lags', type=int)
    attack.add_argument('--ridge', type=float)
    attack.add_argument('--lr', type=float)
    attack.add_argument('--iters', type=int)
    attack.add_argument('--damping', type=float)

    montecarlo = sub.add_parser('montecarlo', parents=[common, noise])
    montecarlo.add_argument('--family', choices=('full', 'first_row'), default='first_row')
    montecarlo.add_argument('--method', choices=('markov', 'graddesc'), default='graddesc')
    montecarlo.add_argument('--runs', type=int, default=100)
    montecarlo.add_argument('--sizes', type=int_list)
    montecarlo.add_argument('--ranks', type=int_list, help='training-input ranks to sweep')
    montecarlo.add_argument('--rank-input', type=int)
    montecarlo.add_argument('--dims', type=dims, default=(4, 4, 4), help='p,l,m')
    montecarlo.add_argument('--test', type=int)
    montecarlo.add_argument('--lags', type=int)
    montecarlo.add_argument('--iters', type=int)
    montecarlo.add_argument('--damping', type=float)
    montecarlo.add_argument('--jobs', type=int, default=1)

    sub.add_parser('selftest', parents=[common])
    return parser


def to_config(args):
    values = vars(args).copy()
    values.pop('json_errors')
    tolerances = Tolerances(rank_eps=values.pop('rank_eps'), residual_eps=values.pop('residual_eps'))
    return RunConfig(tolerances=tolerances, **values)


def report_error(error, as_json, code):
    if as_json:
        print(jsonlib.dumps(error), file=sys.stderr)
    else:
        print(f"{error['error']}: {error['detail']}", file=sys.stderr)
    return code


def run(argv):
    json_errors = '--json-errors' in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return report_error({'error': 'UsageError', 'detail': str(e)}, json_errors, 2)

    logger = setup_logging(args.command)
    try:
        config = to_config(args)
        workflow = WORKFLOWS[args.command](logger, config)
        output = workflow.execute()
    except ConfigError as e:
        return report_error(e.to_dict(), json_errors, 2)
    except UnidentError as e:
        return report_error(e.to_dict(), json_errors, 1)

    if output:
        sys.stdout.write(output)
    return workflow.exit_code


if __name__ == '__main__':
    sys.exit(run(sys.argv[1:]))
