__version__ = "0.1.0"
__author__ = "drham developers"
__maintainer__ = "drham developers"
__license__ = "MIT"
__email__ = "drham-dev@users.noreply.github.com"
