"""
Base CLI interface for the experiment runner.
"""
import argparse
import sys
from abc import ABC, abstractmethod
from typing import Dict, Any, List, Optional, Sequence, Tuple, Type


class BaseCLI(ABC):
    """Abstract base class for CLI interfaces."""

    # (exception type, exit status) pairs, checked in order
    error_statuses: Sequence[Tuple[Type[BaseException], int]] = ()

    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog="dpcontrol",
            description="Distributionally robust control of differentially private linear systems"
        )
        self.setup_parser()

    @abstractmethod
    def setup_parser(self) -> None:
        """Setup command line argument parser."""
        pass

    @abstractmethod
    def execute_command(self, args: argparse.Namespace) -> int:
        """Execute the parsed command."""
        pass

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse arguments, execute the command and map failures to exit statuses."""
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            # argparse exits 2 on usage errors; report them as bad input
            return 0 if not e.code else 1

        try:
            return self.execute_command(args)
        except KeyboardInterrupt:
            self.display_error("Operation cancelled by user.")
            return 1
        except Exception as e:
            status = self.exit_status_for(e)
            self.display_error(str(e), self.suggestions_for(e))
            return status

    def exit_status_for(self, error: BaseException) -> int:
        for error_type, status in self.error_statuses:
            if isinstance(error, error_type):
                return status
        return 1

    def suggestions_for(self, error: BaseException) -> Optional[List[str]]:
        """Hints shown under an error message; subclasses may override."""
        return None

    def display_error(self, error_message: str, suggestions: Optional[List[str]] = None) -> None:
        """Display error message with optional suggestions on stderr."""
        print(f"Error: {error_message}", file=sys.stderr)

        if suggestions:
            print("Suggestions:", file=sys.stderr)
            for i, suggestion in enumerate(suggestions, 1):
                print(f"  {i}. {suggestion}", file=sys.stderr)

    def display_warning(self, message: str) -> None:
        print(f"Warning: {message}", file=sys.stderr)

    def display_value(self, name: str, value: Any) -> None:
        """Print one ``name value`` result line; floats use 6 significant digits."""
        if isinstance(value, float):
            print(f"{name} {value:#.6g}")
        else:
            print(f"{name} {value}")

    def display_values(self, values: Dict[str, Any]) -> None:
        for name, value in values.items():
            self.display_value(name, value)
