"""
Line-preserving preprocessing: ``#ifdef`` blocks and comments.

Dropped lines are replaced by empty lines and comments by spaces so that
positions reported by the parser stay valid for the original file.
"""
import logging
import os
import re
from typing import Iterable, Optional, Set

from config.config import Config
from errors.monitor_errors import SpecSyntaxError

logger = logging.getLogger(__name__)

_DIRECTIVE = re.compile(r"^\s*#\s*(ifdef|ifndef|else|endif|define|include)\b\s*(\S*)")


def active_flags(extra: Iterable[str] = (), environ: Optional[dict] = None) -> Set[str]:
    """``MONITOR`` plus flags from the environment and the caller"""
    environ = os.environ if environ is None else environ
    flags = set(Config.DEFAULT_FLAGS)
    raw = environ.get(Config.FLAGS_ENV_VAR, "")
    flags.update(f for f in re.split(r"[,\s]+", raw) if f)
    flags.update(extra)
    return flags


def preprocess(source: str, flags: Iterable[str]) -> str:
    defined = set(flags)
    # (branch taken, line of the opening directive)
    stack = []
    out = []
    for number, line in enumerate(source.split("\n"), start=1):
        match = _DIRECTIVE.match(line)
        active = all(taken for taken, _ in stack)
        if not match:
            out.append(line if active else "")
            continue
        directive, argument = match.group(1), match.group(2)
        if directive in ("ifdef", "ifndef"):
            if not argument:
                raise SpecSyntaxError(f"#{directive} needs a flag name", number, 1)
            taken = (argument in defined) == (directive == "ifdef")
            stack.append((taken, number))
        elif directive == "else":
            if not stack:
                raise SpecSyntaxError("#else without #ifdef", number, 1)
            taken, opened = stack.pop()
            stack.append((not taken, opened))
        elif directive == "endif":
            if not stack:
                raise SpecSyntaxError("#endif without #ifdef", number, 1)
            stack.pop()
        elif directive == "define" and active:
            defined.add(argument)
        elif directive == "include" and active:
            logger.warning("line %d: #include is not supported and is ignored", number)
        out.append("")
    if stack:
        raise SpecSyntaxError("unterminated #ifdef", stack[-1][1], 1)
    return "\n".join(out)


def strip_comments(source: str) -> str:
    """Blank out ``//`` and ``/* */`` comments outside quoted literals"""
    result = []
    i = 0
    length = len(source)
    quote = None
    while i < length:
        char = source[i]
        if quote:
            result.append(char)
            if char == quote or char == "\n":
                quote = None
            i += 1
            continue
        if char in "'\"":
            quote = char
            result.append(char)
            i += 1
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            end = length if end < 0 else end
            result.append(" " * (end - i))
            i = end
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                line = source.count("\n", 0, i) + 1
                raise SpecSyntaxError("unterminated comment", line, 1)
            end += 2
            result.append("".join(c if c == "\n" else " " for c in source[i:end]))
            i = end
            continue
        result.append(char)
        i += 1
    return "".join(result)
