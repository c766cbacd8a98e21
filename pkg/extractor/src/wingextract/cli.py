"""Run an extraction job from its JSON file.

    wingextract job.json [--stage all|images|captions|pack]

Credentials for real model backends come from environment variables;
the builtin deterministic backends need none.
"""

from __future__ import annotations

import argparse
import sys

from .errors import WingextractError
from .job import load_job
from .pipeline import (
    build_class_pack,
    extract_caption_embeddings,
    extract_image_embeddings,
    run_job,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wingextract", description=__doc__)
    parser.add_argument("job", help="job file (JSON)")
    parser.add_argument(
        "--stage", choices=("all", "images", "captions", "pack"), default="all"
    )
    args = parser.parse_args(argv)
    try:
        job = load_job(args.job)
        if args.stage == "all":
            written = run_job(job)
            for stage, path in written.items():
                if path is not None:
                    print(f"{stage}: {path}")
        elif args.stage == "images":
            print(f"images: {extract_image_embeddings(job)}")
        elif args.stage == "captions":
            print(f"captions: {extract_caption_embeddings(job)}")
        else:
            print(f"pack: {build_class_pack(job)}")
        return 0
    except WingextractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
