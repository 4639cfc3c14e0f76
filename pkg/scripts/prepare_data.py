#!/usr/bin/env python3
"""Fetch the evaluation corpora and write them as local CSV files.

The loaders in ``ballpark`` only ever read local files; this script is the
one place that touches the network. All three corpora are redistributed
inside packages on PyPI, so ``pip download`` is enough:

* 20 Newsgroups (bydate split, pre-tokenized) from ``orange3-text``
* Pang & Lee polarity v2.0 (a 1500-review balanced sample) from the
  ``pattern3`` source distribution
* UCI Adult (``adult.data``) from ``responsibly``

Output layout under ``--out`` (default ``data/``)::

    newsgroups/<task>.train.csv   id,text,label   (label +1 / -1)
    newsgroups/<task>.test.csv
    movie_reviews.csv             id,text,label
    adult.csv                     tabular csv with header, label column
"""

import argparse
import csv
import io
import subprocess
import sys
import tarfile
import tempfile
import zipfile
from pathlib import Path

csv.field_size_limit(sys.maxsize)

NEWSGROUP_TASKS = {
    "med-space": ("sci.med", "sci.space"),
    "pc-mac": ("comp.sys.ibm.pc.hardware", "comp.sys.mac.hardware"),
    "baseball-hockey": ("rec.sport.baseball", "rec.sport.hockey"),
}

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def pip_download(spec, dest, sdist=False):
    cmd = [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
           "-d", str(dest), spec]
    if sdist:
        cmd[4:4] = ["--no-binary", ":all:"]
    subprocess.run(cmd, check=True)
    files = sorted(Path(dest).iterdir())
    if not files:
        raise RuntimeError(f"pip download produced nothing for {spec}")
    return files[0]


def write_text_csv(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "text", "label"])
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def prepare_newsgroups(tmp, out):
    wheel = pip_download("orange3-text==1.16.3", tmp / "o3t")
    with zipfile.ZipFile(wheel) as z:
        for split in ("train", "test"):
            name = f"orangecontrib/text/datasets/20newsgroups-{split}.tab"
            text = z.read(name).decode("utf-8")
            rows = list(csv.reader(io.StringIO(text), delimiter="\t"))[3:]
            for task, (pos, neg) in NEWSGROUP_TASKS.items():
                sel = []
                for i, row in enumerate(rows):
                    if len(row) < 2 or row[0] not in (pos, neg):
                        continue
                    label = 1 if row[0] == pos else -1
                    sel.append([f"{split}{i}", " ".join(row[1].split()), label])
                write_text_csv(out / "newsgroups" / f"{task}.{split}.csv", sel)


def prepare_movie_reviews(tmp, out):
    sdist = pip_download("pattern3==3.0.0", tmp / "p3", sdist=True)
    name = "pattern3-3.0.0/test/corpora/polarity-en-pang&lee1.csv"
    with tarfile.open(sdist) as t:
        raw = t.extractfile(name).read().decode("utf-8-sig")
    rows = []
    for i, (label, text) in enumerate(csv.reader(io.StringIO(raw))):
        rows.append([f"review{i}", " ".join(text.split()), int(label)])
    write_text_csv(out / "movie_reviews.csv", rows)


def prepare_adult(tmp, out):
    wheel = pip_download("responsibly==0.1.2", tmp / "resp")
    with zipfile.ZipFile(wheel) as z:
        raw = z.read("responsibly/dataset/adult/adult.data").decode("utf-8")
    rows = []
    for line in raw.splitlines():
        fields = [x.strip() for x in line.split(",")]
        if len(fields) != len(ADULT_COLUMNS) or "?" in fields:
            continue
        fields[-1] = "1" if fields[-1].startswith(">50K") else "-1"
        rows.append(fields)
    path = out / "adult.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id"] + ADULT_COLUMNS[:-1] + ["label"])
        for i, fields in enumerate(rows):
            w.writerow([f"adult{i}"] + fields)
    print(f"wrote {path} ({len(rows)} rows)")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("data"))
    parser.add_argument("--only", choices=["newsgroups", "movie", "adult"])
    args = parser.parse_args(argv)
    steps = {
        "newsgroups": prepare_newsgroups,
        "movie": prepare_movie_reviews,
        "adult": prepare_adult,
    }
    with tempfile.TemporaryDirectory() as d:
        for key, fn in steps.items():
            if args.only in (None, key):
                fn(Path(d), args.out)


if __name__ == "__main__":
    main()
