#!/usr/bin/env python3
"""Best-effort converter from annotated-news XML corpora to the canonical
line-delimited JSON format.

Expected layout (element names vary slightly between corpus releases and can
be overridden with flags):

    <articles>
      <article docid="...">
        <text>...</text>
        <toponyms>
          <toponym>
            <start>10</start><end>18</end><phrase>Edmonton</phrase>
            <gaztag geonameid="5946768"><lat>53.55</lat><lon>-113.46</lon></gaztag>
          </toponym>
        </toponyms>
      </article>
    </articles>

Mentions whose span does not reproduce the phrase are dropped with a warning;
the loader applies the same rule, so fidelity is validated downstream by
mention counts.
"""
import argparse
import json
import sys
import xml.etree.ElementTree as ET


def text_of(elem, tag):
    child = elem.find(tag)
    return child.text if child is not None and child.text is not None else None


def convert(tree, args, out):
    docs = mentions = dropped = 0
    for article in tree.iter(args.article_tag):
        doc_id = article.get("docid") or article.get("id") or f"doc{docs}"
        text = text_of(article, args.text_tag) or ""
        record = {"doc_id": doc_id, "text": text, "mentions": []}
        for top in article.iter(args.toponym_tag):
            start = text_of(top, "start")
            end = text_of(top, "end")
            phrase = text_of(top, "phrase") or text_of(top, "extractedName")
            if start is None or end is None or phrase is None:
                dropped += 1
                continue
            start, end = int(start), int(end)
            if text[start:end] != phrase:
                dropped += 1
                print(f"warning: {doc_id}: span [{start},{end}) != phrase "
                      f"{phrase!r}, dropped", file=sys.stderr)
                continue
            gold_id = lat = lon = None
            gaztag = top.find("gaztag")
            if gaztag is not None:
                gid = gaztag.get("geonameid")
                gold_id = int(gid) if gid and gid.isdigit() else None
                lat = text_of(gaztag, "lat")
                lon = text_of(gaztag, "lon")
            record["mentions"].append({
                "start": start, "end": end, "surface": phrase,
                "gold_id": gold_id,
                "lat": float(lat) if lat is not None else None,
                "lon": float(lon) if lon is not None else None,
            })
            mentions += 1
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
        docs += 1
    print(f"converted {docs} documents, {mentions} mentions "
          f"({dropped} dropped)", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("xml", help="corpus XML file")
    ap.add_argument("-o", "--output", help="output JSONL (default stdout)")
    ap.add_argument("--article-tag", default="article")
    ap.add_argument("--text-tag", default="text")
    ap.add_argument("--toponym-tag", default="toponym")
    args = ap.parse_args()
    tree = ET.parse(args.xml)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as out:
            convert(tree, args, out)
    else:
        convert(tree, args, sys.stdout)


if __name__ == "__main__":
    main()
