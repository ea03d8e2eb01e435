from .cli import main, dispatch, Command
