import argparse
import json
import logging
import sys

import formats
from config import Config, VALID_FORMATS, VALID_LOG_LEVELS
from errors import InconsistencyError
from services.arrangement_library import BUILTINS, ArrangementLibrary
from services.arrangement_service import INCONCLUSIVE, ArrangementService
from services.braid_service import BraidService
from services.bundle_service import BundleService
from services.germ_service import GermService
from services.lefschetz_service import LefschetzService
from services.mcg_service import McgService
from services.plumbing_service import PlumbingService
from services.scott_service import ScottService
from services.wiring_service import WiringService

logger = logging.getLogger("Curvetta")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3

# Initialize Services
braid_service = BraidService()
plumbing_service = PlumbingService()
germ_service = GermService()
mcg_service = McgService(braid_service)
lefschetz_service = LefschetzService(mcg_service, plumbing_service)
wiring_service = WiringService(braid_service, lefschetz_service)
scott_service = ScottService(germ_service, plumbing_service, lefschetz_service)
arrangement_service = ArrangementService()
arrangement_library = ArrangementLibrary(lefschetz_service, wiring_service, mcg_service)
bundle_service = BundleService(plumbing_service, germ_service, wiring_service, scott_service)


class CommandResult:
    def __init__(self, payload, exit_code: int = EXIT_OK):
        self.payload = payload
        self.exit_code = exit_code


def _input(args):
    return formats.load_json(args.input or args.path)


def _structure(args):
    if args.builtin:
        return arrangement_library.builtin(args.builtin)
    return formats.structure_from_json(_input(args))


def _wiring(args):
    if args.builtin:
        return wiring_service.wiring_from_structure(arrangement_library.builtin(args.builtin))
    return formats.wiring_from_json(_input(args))


def cmd_validate_graph(args) -> CommandResult:
    graph = formats.graph_from_json(_input(args))
    report = plumbing_service.validate_reduced_cycle(graph)
    payload = report.to_dict()
    if report.ok:
        coefficients, multiplicity = plumbing_service.fundamental_cycle(graph)
        payload["multiplicity"] = multiplicity
        payload["fundamental_cycle"] = {str(v): c for v, c in coefficients.items()}
    return CommandResult(payload, EXIT_OK if report.ok else EXIT_INVALID)


def cmd_extensions(args) -> CommandResult:
    graph = formats.graph_from_json(_input(args))
    extensions = plumbing_service.enumerate_extensions(graph)
    payload = {
        "extensions": [
            {
                "slot": ext.outer_slot,
                "root": ext.root(),
                "carriers": [ext.carrier(label) for label in range(1, ext.m + 1)],
            }
            for ext in extensions
        ],
        "groups": [
            [extensions[k].outer_slot for k in group] for group in plumbing_service.group_extensions(extensions)
        ],
    }
    return CommandResult(payload)


def cmd_germ(args) -> CommandResult:
    graph = formats.graph_from_json(_input(args))
    extended = plumbing_service.extension(graph, args.slot)
    germ = germ_service.derive_germ(extended)
    payload = {"slot": args.slot, "germ": formats.germ_to_json(germ)}
    if args.oracle:
        oracle = germ_service.blowdown_oracle(extended)
        if oracle != germ:
            raise InconsistencyError(f"Blow-down oracle gives {oracle}, path formulas give {germ}")
        payload["oracle"] = "AGREES"
    return CommandResult(payload)


def cmd_scott(args) -> CommandResult:
    germ = formats.germ_from_json(_input(args))
    report = germ_service.validate_germ(germ)
    if not report.ok:
        return CommandResult(report.to_dict(), EXIT_INVALID)
    family, fibration, matrix = scott_service.scott_deformation(germ)
    payload = {
        "family": family.to_dict(),
        "cycles": [formats.curve_to_json(c) for c in fibration.cycles],
        "matrix": formats.matrix_to_json(matrix),
        "simply_connected": lefschetz_service.simply_connected_sufficient(matrix),
    }
    return CommandResult(payload)


def cmd_gay_mark(args) -> CommandResult:
    graph = formats.graph_from_json(_input(args))
    family = scott_service.gay_mark(graph, args.slot)
    fibration = lefschetz_service.nested_fibration(family)
    payload = {
        "family": formats.family_to_json(family),
        "cycles": [formats.curve_to_json(c) for c in fibration.cycles],
        "matrix": formats.matrix_to_json(family.matrix()),
    }
    return CommandResult(payload)


def cmd_wiring_to_lefschetz(args) -> CommandResult:
    wiring = _wiring(args)
    fibration = wiring_service.to_lefschetz(wiring)
    payload = {
        "holes": fibration.m,
        "cycles": [formats.curve_to_json(c) for c in fibration.cycles],
        "matrix": formats.matrix_to_json(lefschetz_service.incidence_matrix(fibration)) if fibration.cycles else [],
        "hole_weights": list(wiring_service.hole_weights(wiring)),
    }
    return CommandResult(payload)


def cmd_invariants(args) -> CommandResult:
    if args.builtin:
        matrix = arrangement_library.builtin(args.builtin).incidence_matrix()
    else:
        matrix = formats.matrix_from_json(_input(args))
    payload = lefschetz_service.invariants(matrix).to_dict()
    payload["simply_connected"] = lefschetz_service.simply_connected_sufficient(matrix)
    return CommandResult(payload)


def cmd_compare_monodromy(args) -> CommandResult:
    wiring = _wiring(args)
    around = wiring_service.circumnavigation_monodromy(wiring)
    twists = mcg_service.product_record(wiring_service.vanishing_cycles(wiring), wiring.strands)
    if not mcg_service.records_equal(around, twists):
        raise InconsistencyError("IDENTITY FAILS: circumnavigation and product of twists differ")
    payload = {
        "result": "IDENTITY HOLDS",
        "circumnavigation": formats.record_to_json(around),
        "product_of_twists": formats.record_to_json(twists),
    }
    return CommandResult(payload)


def cmd_lantern(args) -> CommandResult:
    matrix = formats.matrix_from_json(_input(args))
    substituted = lefschetz_service.lantern_substitute(matrix, args.column)
    payload = {
        "matrix": formats.matrix_to_json(substituted),
        "euler_before": lefschetz_service.invariants(matrix).euler,
        "euler_after": lefschetz_service.invariants(substituted).euler,
    }
    return CommandResult(payload)


def cmd_artin_recognize(args) -> CommandResult:
    family = formats.family_from_json(_input(args))
    return CommandResult(formats.graph_to_json(lefschetz_service.artin_recognize(family)))


def _weights(text: str) -> list:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise ValueError(f"--weights must be a comma-separated list of integers, got {text}")


def cmd_certify_unexpected(args) -> CommandResult:
    structure = _structure(args)
    certificate = arrangement_service.unexpected_certify(structure, args.trials, args.seed)
    payload = certificate.to_dict()
    payload["line_weights"] = list(structure.line_weights())
    if args.weights:
        payload["filling"] = bundle_service.mark_weights(structure, _weights(args.weights)).to_dict()
    return CommandResult(payload, EXIT_INCONCLUSIVE if certificate.verdict == INCONCLUSIVE else EXIT_OK)


def cmd_bundle_extend(args) -> CommandResult:
    if args.builtin:
        structure = arrangement_library.builtin(args.builtin)
        trees = formats.trees_from_json(formats.load_json(args.trees)) if args.trees else {}
    else:
        data = _input(args)
        structure = formats.structure_from_json(data["structure"])
        trees = formats.trees_from_json(data.get("trees", {}))
    bundled, germ, graph = bundle_service.bundle_extend(structure, trees)
    payload = {
        "structure": bundled.to_dict(),
        "germ": formats.germ_to_json(germ),
        "graph": formats.graph_to_json(graph),
        "pairwise_once": bundled.is_pseudoline(),
    }
    return CommandResult(payload)


COMMANDS = {
    "validate-graph": (cmd_validate_graph, "Check tree, negative definiteness and a(v) <= -v·v"),
    "extensions": (cmd_extensions, "Enumerate curvetta extensions, one per (-1) slot"),
    "germ": (cmd_germ, "Decorated germ of one extension"),
    "scott": (cmd_scott, "Scott deformation of a decorated germ"),
    "gay-mark": (cmd_gay_mark, "Disjoint vanishing cycles read off a plumbing graph"),
    "wiring-to-lefschetz": (cmd_wiring_to_lefschetz, "Vanishing cycles of a braided wiring diagram"),
    "invariants": (cmd_invariants, "Homology, intersection form and c1 from an incidence matrix"),
    "compare-monodromy": (cmd_compare_monodromy, "Circumnavigation monodromy against the product of twists"),
    "lantern": (cmd_lantern, "Lantern substitution on a triple column"),
    "artin-recognize": (cmd_artin_recognize, "Plumbing graph from disjoint vanishing cycles"),
    "certify-unexpected": (cmd_certify_unexpected, "Certify that an arrangement is unexpected"),
    "bundle-extend": (cmd_bundle_extend, "Replace lines by bundles grown along rooted trees"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("path", nargs="?", help="input JSON (same as --input)")
    common.add_argument("--input", help="input JSON file; stdin when omitted")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=Config.SEED)
    common.add_argument("--trials", type=int, default=Config.TRIALS)
    common.add_argument("--builtin", help=f"builtin arrangement: {', '.join(BUILTINS)}")
    common.add_argument("--format", choices=VALID_FORMATS, default=Config.OUTPUT_FORMAT)

    parser = argparse.ArgumentParser(prog="curvetta", description="Stein fillings from curvetta arrangements")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        command = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("germ", "gay-mark"):
            command.add_argument("--slot", type=int, default=1, help="outer (-1) slot, 1-based")
        if name == "germ":
            command.add_argument("--oracle", action="store_true", help="cross-check by blowing down")
        if name == "lantern":
            command.add_argument("--column", type=int, required=True, help="0-based triple column")
        if name == "bundle-extend":
            command.add_argument("--trees", help="JSON file of rooted trees keyed by line, with --builtin")
        if name == "certify-unexpected":
            command.add_argument("--weights", help="comma-separated line weights to mark the arrangement up to")
    return parser


def _emit(payload, args):
    text = formats.dumps(payload) if args.format == "json" else formats.render_table(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    logging.basicConfig(
        level=Config.LOG_LEVEL if Config.LOG_LEVEL in VALID_LOG_LEVELS else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        Config.validate()
    except ValueError as e:
        logger.critical(str(e))
        return EXIT_ERROR

    args = build_parser().parse_args(argv)
    handler, _ = COMMANDS[args.command]
    try:
        result = handler(args)
    except json.JSONDecodeError as e:
        logger.error(f"Malformed JSON at line {e.lineno} column {e.colno}: {e.msg}")
        sys.stderr.write(f"error: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}\n")
        return EXIT_ERROR
    except InconsistencyError as e:
        logger.critical(str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR
    except (ValueError, KeyError, TypeError) as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"Cannot read input: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR

    _emit(result.payload, args)
    logger.info(f"{args.command} finished with exit code {result.exit_code}")
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
