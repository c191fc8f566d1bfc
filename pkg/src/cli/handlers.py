"""
Manejadores de subcomandos: cada uno lee sus ficheros, ejecuta un algoritmo
y devuelve el código de salida (0 sí, 1 no, 2 error de entrada).
Los artefactos van a stdout; los diagnósticos, a stderr.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

from src.cli.command_registry import CommandRegistry, command_registry
from src.jobs.oracle_batch import (
    CompatInstance,
    CompletionInstance,
    random_compat_instances,
    random_completion_instances,
    run_agreement_batch,
)
from src.models.characters import CharacterSet
from src.modules.compatibility import galled_compatible
from src.modules.completion import galled_completion, refine_and_complete, restrict_to_candidates
from src.modules.oracle import brute_force_completable
from src.modules.ptn_verify import explains, fa_distribution, fa_statistics, render_fa_table
from src.services.matrix_service import FORMATS, load_character_matrix, load_taxa_list
from src.services.network_format_service import EXPORT_FORMATS, export_network, load_network
from src.services.newick_service import load_tree, serialize_newick
from src.utils.config import Settings
from src.utils.error_handler import EXIT_OK, EXIT_REJECTED, InputError, handle_errors
from src.utils.logger import console, get_logger

logger = get_logger("cli")


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(payload: Dict[str, Any]) -> None:
    _emit(json.dumps(payload, ensure_ascii=False))


class CliHandlers:
    def __init__(self, settings: Settings, registry: CommandRegistry = command_registry):
        self.settings = settings
        self.registry = registry

    def get_handlers(self) -> Dict[str, Callable[[argparse.Namespace], int]]:
        return {
            "verify": self.verify_command,
            "complete": self.complete_command,
            "compat": self.compat_command,
            "fa-stats": self.fa_stats_command,
            "oracle": self.oracle_command,
        }

    def dispatch(self, args: argparse.Namespace) -> int:
        handler = self.get_handlers()[args.command]
        logger.debug(f"Running '{args.command}'")
        return handler(args)

    def _characters(self, path: str, fmt: str) -> Tuple[CharacterSet, List[str]]:
        characters, taxa = load_character_matrix(path, fmt)
        if characters.dropped:
            console.print(f"[warning]⚠️ {len(characters.dropped)} duplicate characters ignored[/warning]")
        return characters, taxa

    @handle_errors
    def verify_command(self, args: argparse.Namespace) -> int:
        record = load_network(args.network)
        characters, _ = self._characters(args.matrix, args.format)
        report = explains(record.network, characters)

        _emit("character\tverdict\torigin")
        for verdict in report.verdicts:
            origin = "-" if verdict.origin is None else str(verdict.origin)
            _emit(f"{verdict.character.name}\t{'explained' if verdict.explained else 'unexplained'}\t{origin}")
            declared = record.origins.get(verdict.character.name)
            if declared is not None and declared != verdict.origin:
                logger.warning(
                    f"⚠️ File declares origin {declared} for {verdict.character.name!r}, found {verdict.origin}"
                )

        if report.all_explained:
            console.print(f"[success]✅ All {len(report.verdicts)} characters explained[/success]")
            return EXIT_OK
        console.print(f"[error]❌ {len(report.unexplained())} of {len(report.verdicts)} characters unexplained[/error]")
        return EXIT_REJECTED

    @handle_errors
    def complete_command(self, args: argparse.Namespace) -> int:
        tree = load_tree(args.tree)
        characters, _ = self._characters(args.matrix, args.format)
        fmt = args.out or self.settings.output.default_format
        comments = [f"completion of {Path(args.tree).name} for {Path(args.matrix).name}"]

        if args.drop_blocking:
            characters, dropped = restrict_to_candidates(tree, characters)
            if dropped:
                names = ", ".join(c.name for c in dropped)
                comments.append(f"dropped: {names}")
                console.print(f"[warning]⚠️ Dropped characters with more than two first appearances: {names}[/warning]")

        outcome = galled_completion(tree, characters)
        if not outcome.completable and args.refine:
            refined = refine_and_complete(tree, characters, self.settings.refinement.max_polytomy_degree)
            if refined is not None:
                tree, outcome = refined
                comments.append(f"refined tree: {serialize_newick(tree)}")

        if outcome.completable:
            _emit(export_network(outcome.network, outcome.origins, fmt, comments))
            console.print(
                f"[success]✅ Completable with {len(outcome.network.transfer_edges)} transfer edges[/success]"
            )
            return EXIT_OK

        _emit_json(outcome.to_dict(tree))
        console.print(f"[error]❌ Not galled-completable ({type(outcome.rejection).__name__})[/error]")
        return EXIT_REJECTED

    @handle_errors
    def compat_command(self, args: argparse.Namespace) -> int:
        characters, taxa = self._characters(args.matrix, args.format)
        if args.taxa:
            taxa = load_taxa_list(args.taxa)
        fmt = args.out or self.settings.output.default_format

        outcome = galled_compatible(characters, taxa)
        if outcome.compatible:
            newick = serialize_newick(outcome.tree)
            if fmt == "newick":
                _emit(newick)
            else:
                _emit(export_network(outcome.network, outcome.origins, fmt, [f"tree: {newick}"]))
            console.print(
                f"[success]✅ Galled-compatible ({len(outcome.network.transfer_edges)} transfer edges)[/success]"
            )
            return EXIT_OK

        _emit_json({"verdict": "rejected", "reason": "NotGalledCompatible", "trace": outcome.trace})
        console.print("[error]❌ Not galled-compatible[/error]")
        for line in outcome.trace:
            console.print(line, style="warning", markup=False)
        return EXIT_REJECTED

    @handle_errors
    def fa_stats_command(self, args: argparse.Namespace) -> int:
        tree = load_tree(args.tree)
        characters, _ = self._characters(args.matrix, args.format)
        rows = fa_statistics(tree, characters)

        text = render_fa_table(tree, rows)
        if args.summary:
            distribution = fa_distribution(rows)
            text += "".join(f"# fas={fas}\t{count}\n" for fas, count in distribution.histogram.items())
            text += f"# candidates\t{','.join(distribution.candidates)}\n"
        _emit(text)
        return EXIT_OK

    @handle_errors
    def oracle_command(self, args: argparse.Namespace) -> int:
        oracle = self.settings.oracle
        widened = None

        if args.random is not None:
            if args.random < 1:
                raise InputError("--random needs a positive number of instances")
            seed = oracle.seed if args.seed is None else args.seed
            if args.subject == "complete":
                instances = random_completion_instances(args.random, seed, oracle)
            else:
                instances = random_compat_instances(args.random, seed, oracle)
        elif args.subject == "complete":
            if len(args.files) != 2:
                raise InputError("oracle complete expects TREE MATRIX (or --random N)")
            tree = load_tree(args.files[0])
            characters, _ = self._characters(args.files[1], args.format)
            instances = [CompletionInstance(tree, characters)]
            if args.widen:
                widened = brute_force_completable(tree, characters, widen=True,
                                                  widen_max_edges=oracle.widen_max_edges).ok
        else:
            if len(args.files) != 1:
                raise InputError("oracle compat expects MATRIX (or --random N)")
            characters, taxa = self._characters(args.files[0], args.format)
            if args.taxa:
                taxa = load_taxa_list(args.taxa)
            instances = [CompatInstance(characters, taxa)]

        report = run_agreement_batch(args.subject, instances, args.jobs, oracle)
        if widened is not None and widened != report.results[0].oracle:
            report.disagreements.append(
                f"widened search says {'yes' if widened else 'no'}, matching search says "
                f"{'yes' if report.results[0].oracle else 'no'}"
            )

        _emit(report.summary())
        for disagreement in report.disagreements:
            _emit(disagreement)
        if report.ok:
            console.print("[success]✅ No disagreements[/success]")
            return EXIT_OK
        console.print(f"[error]❌ {len(report.disagreements)} disagreements[/error]")
        return EXIT_REJECTED


def _add_matrix_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help="matrix format (default: csv for .csv files, sets otherwise)")


def build_parser(registry: CommandRegistry = command_registry) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="galled-ptn",
        description="Galled perfect transfer networks: verification, completion and compatibility.",
        epilog=registry.get_help_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="YAML configuration file (default: ./config.yaml when present)")
    parser.add_argument("--log-file", help="also write logs to this file")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug output on stderr")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str) -> argparse.ArgumentParser:
        info = registry.get(name)
        return subparsers.add_parser(name, help=info.description, description=info.description)

    verify = add("verify")
    verify.add_argument("network", help="network in the structured format")
    verify.add_argument("matrix", help="character matrix")
    _add_matrix_format(verify)

    complete = add("complete")
    complete.add_argument("tree", help="Newick tree")
    complete.add_argument("matrix", help="character matrix")
    complete.add_argument("--out", choices=EXPORT_FORMATS, default=None)
    complete.add_argument("--drop-blocking", action="store_true",
                          help="ignore characters with more than two first appearances")
    complete.add_argument("--refine", action="store_true",
                          help="try single polytomy refinements when the tree is not completable")
    _add_matrix_format(complete)

    compat = add("compat")
    compat.add_argument("matrix", help="character matrix")
    compat.add_argument("--taxa", help="whitespace-separated taxa file (default: taxa of the matrix)")
    compat.add_argument("--out", choices=EXPORT_FORMATS + ("newick",), default=None)
    _add_matrix_format(compat)

    fa_stats = add("fa-stats")
    fa_stats.add_argument("tree", help="Newick tree")
    fa_stats.add_argument("matrix", help="character matrix")
    fa_stats.add_argument("--summary", action="store_true",
                          help="append the FA-count histogram and the candidate characters")
    _add_matrix_format(fa_stats)

    oracle = add("oracle")
    oracle.add_argument("subject", choices=("complete", "compat"))
    oracle.add_argument("files", nargs="*", help="TREE MATRIX for complete, MATRIX for compat")
    oracle.add_argument("--taxa", help="taxa file for compat")
    oracle.add_argument("--random", type=int, default=None, metavar="N",
                        help="random instances (per enumerated tree for complete)")
    oracle.add_argument("--seed", type=int, default=None)
    oracle.add_argument("--jobs", type=int, default=1, metavar="J",
                        help="worker processes for a batch; the other commands always run in one process")
    oracle.add_argument("--widen", action="store_true",
                        help="also run the unrestricted search on a single completion instance")
    _add_matrix_format(oracle)

    return parser
