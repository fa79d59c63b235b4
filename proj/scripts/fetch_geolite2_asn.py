#!/usr/bin/env python3
"""Rebuild data/geolite2-asn-2018.csv from the GeoLite2 ASN database shipped in
the `geolite2` npm package, version 1.2.1 (build of 2018-02-20).

Needs npm and the `maxminddb` Python package. Writes `network,asn,active_count`
rows for every IPv4 network; active_count is the block size since the source
has no activity data.
"""

import argparse
import pathlib
import subprocess
import tarfile
import tempfile

import maxminddb

PACKAGE = "geolite2@1.2.1"


def fetch_mmdb(workdir: pathlib.Path) -> pathlib.Path:
    out = subprocess.run(["npm", "pack", PACKAGE], cwd=workdir, check=True, capture_output=True, text=True)
    tgz = workdir / out.stdout.strip().splitlines()[-1]
    with tarfile.open(tgz) as tar:
        tar.extract("package/dbs/GeoLite2-ASN.mmdb", workdir)
    return workdir / "package" / "dbs" / "GeoLite2-ASN.mmdb"


def convert(mmdb: pathlib.Path, dest: pathlib.Path) -> int:
    rows = 0
    with maxminddb.open_database(str(mmdb)) as reader, dest.open("w", newline="\n") as out:
        out.write("network,asn,active_count\n")
        for net, rec in reader:
            if net.version != 4:
                continue
            asn = rec.get("autonomous_system_number") or 0
            out.write(f"{net},{asn},{net.num_addresses}\n")
            rows += 1
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/geolite2-asn-2018.csv")
    ap.add_argument("--archive", action="store_true", help="also write <out>.tar.xz")
    args = ap.parse_args()
    dest = pathlib.Path(args.out)
    with tempfile.TemporaryDirectory() as tmp:
        rows = convert(fetch_mmdb(pathlib.Path(tmp)), dest)
    print(f"{rows} rows -> {dest}")
    if args.archive:
        with tarfile.open(f"{dest}.tar.xz", "w:xz") as tar:
            tar.add(dest, arcname=dest.name)


if __name__ == "__main__":
    main()
