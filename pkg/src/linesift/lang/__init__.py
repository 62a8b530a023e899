from .astnodes import *  # noqa: F401,F403
from .lexer import Token, tokenize  # noqa: F401
from .parser import parse  # noqa: F401
