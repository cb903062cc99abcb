import sys

if __name__ == "__main__":
    from mtve.cli import main
    from mtve.solver import resolve_workers

    print(f"[mtve] Using {resolve_workers()} worker thread(s)")
    sys.exit(main())
