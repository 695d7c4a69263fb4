# app.py

import sys

from cli_app.main import main

if __name__ == "__main__":
    sys.exit(main())
