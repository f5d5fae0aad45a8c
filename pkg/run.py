"""Simple script to run an experiment command."""
from sparse_recovery.cli import main


if __name__ == "__main__":
    raise SystemExit(main())
