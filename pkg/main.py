import logging
import sys
from typing import List, Optional

from rich.panel import Panel

from src.cli.handlers import CliHandlers, build_parser
from src.utils.config import load_config
from src.utils.error_handler import EXIT_INPUT_ERROR, InputError
from src.utils.logger import console, setup_logger


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits on --help and on usage errors
        return e.code if isinstance(e.code, int) else (EXIT_INPUT_ERROR if e.code else 0)

    try:
        settings = load_config(args.config)
    except InputError as e:
        console.print(f"[error]❌ {e}[/error]")
        return EXIT_INPUT_ERROR

    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.getLevelName(settings.logging.level.upper())
    setup_logger(log_file=args.log_file or settings.logging.file, level=level)

    if args.verbose:
        console.print(Panel.fit(
            f"[start]🧬 galled-ptn {args.command}[/start]",
            border_style="magenta",
            padding=(0, 2)
        ))

    return CliHandlers(settings).dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
