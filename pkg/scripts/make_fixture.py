"""Write the small fixture corpus (commit logs, issue export, alias map) to a directory."""
import argparse

from repoforge.fixture import write_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", help="directory to create or fill")
    args = ap.parse_args()
    for role, path in write_fixture(args.out_dir).items():
        print(f"{role:12s} {path}")


if __name__ == "__main__":
    main()
