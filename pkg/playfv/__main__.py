"""Allow running playfv with python -m playfv."""
import sys
from .cli import main

if __name__ == "__main__":
    sys.exit(main())
