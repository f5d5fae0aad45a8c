"""python -m sparse_recovery <command> [flags]"""
from sparse_recovery.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
