import sys
from colorama import Fore, Style


class Logger():
    quiet = False

    def __init__(self, name):
        self.name = name

    def _emit(self, colour, tag, text):
        print(colour + f"[{tag}] " + Style.RESET_ALL + text, file=sys.stderr)

    def info(self, text):
        if Logger.quiet:
            return
        self._emit(Fore.CYAN, self.name.upper(), text)

    def warning(self, text):
        self._emit(Fore.YELLOW, self.name.upper(), text)

    def error(self, text, fatal=False):
        self._emit(Fore.RED, self.name.upper(), text)

        if fatal:
            raise SystemExit(1)

    def urgent(self, text):
        self._emit(Fore.RED, "IMPORTANT", text)
