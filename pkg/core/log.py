# Console logging in the house colours: blue progress, green success,
# yellow warnings, red errors. Everything goes to stderr; stdout carries data.
from rich.console import Console
from rich.markup import escape

console = Console(stderr=True)

_quiet = False


def set_quiet(flag: bool) -> None:
    global _quiet
    _quiet = bool(flag)


def info(message: str) -> None:
    if not _quiet:
        console.print(f"[blue]{escape(message)}[/blue]")


def success(message: str) -> None:
    if not _quiet:
        console.print(f"[green]{escape(message)}[/green]")


def warn(message: str) -> None:
    console.print(f"[yellow]Warning: {escape(message)}[/yellow]")


def error(message: str) -> None:
    console.print(f"[bold red]Error: {escape(message)}[/bold red]")
