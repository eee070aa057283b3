#!/usr/bin/env python3
"""Best-effort converter from brat-annotated corpora (paired .txt/.ann
files) to the canonical line-delimited JSON format.

Span lines ("T1<TAB>Type start end<TAB>surface") whose type is in
--location-types become mentions. Gold ids and coordinates are read from
AnnotatorNotes attached to the span: a bare integer or <geoID>...</geoID> is
a gazetteer id, "lat, lon" a coordinate pair.
"""
import argparse
import json
import re
import sys
from pathlib import Path

DEFAULT_TYPES = {"Literal", "Coded", "Location", "Toponym"}


def parse_ann(path, location_types):
    spans = {}    # T id -> (start, end, surface)
    notes = {}    # T id -> note text
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        fields = line.split("\t")
        if line.startswith("T") and len(fields) >= 3:
            tid = fields[0]
            head = fields[1].split()
            if not head or head[0] not in location_types:
                continue
            if ";" in fields[1]:
                continue  # discontinuous spans are out of scope
            try:
                start, end = int(head[1]), int(head[2])
            except (IndexError, ValueError):
                continue
            spans[tid] = (start, end, fields[2])
        elif line.startswith("#") and len(fields) >= 3:
            target = fields[1].split()
            if len(target) >= 2 and target[1].startswith("T"):
                notes.setdefault(target[1], []).append(fields[2])
    return spans, notes


def gold_from_notes(note_list):
    gold_id = lat = lon = None
    for note in note_list:
        m = re.search(r"<geoID>\s*(\d+)\s*</geoID>", note) or \
            re.fullmatch(r"\s*(\d+)\s*", note)
        if m:
            gold_id = int(m.group(1))
            continue
        m = re.search(r"(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)", note)
        if m:
            lat, lon = float(m.group(1)), float(m.group(2))
    return gold_id, lat, lon


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("corpus_dir", help="directory of paired .txt/.ann files")
    ap.add_argument("-o", "--output", help="output JSONL (default stdout)")
    ap.add_argument("--location-types", default=",".join(sorted(DEFAULT_TYPES)),
                    help="comma-separated brat types treated as toponyms")
    args = ap.parse_args()
    location_types = set(t for t in args.location_types.split(",") if t)

    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    docs = mentions = dropped = 0
    for txt in sorted(Path(args.corpus_dir).glob("*.txt")):
        ann = txt.with_suffix(".ann")
        if not ann.exists():
            continue
        text = txt.read_text(encoding="utf-8")
        spans, notes = parse_ann(ann, location_types)
        record = {"doc_id": txt.stem, "text": text, "mentions": []}
        for tid in sorted(spans, key=lambda t: spans[t][0]):
            start, end, surface = spans[tid]
            if text[start:end] != surface:
                dropped += 1
                print(f"warning: {txt.stem}:{tid} span/surface mismatch, dropped",
                      file=sys.stderr)
                continue
            gold_id, lat, lon = gold_from_notes(notes.get(tid, []))
            record["mentions"].append({
                "start": start, "end": end, "surface": surface,
                "gold_id": gold_id, "lat": lat, "lon": lon,
            })
            mentions += 1
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
        docs += 1
    print(f"converted {docs} documents, {mentions} mentions "
          f"({dropped} dropped)", file=sys.stderr)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
