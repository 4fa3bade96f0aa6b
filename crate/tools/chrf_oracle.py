#!/usr/bin/env python3
"""Reference ChrF implementation used to generate the frozen test corpus.

Computes the character n-gram F-beta score over space-joined sub-token
sequences. Precision and recall are arithmetic means over the n-gram orders
1..max_n, where an order contributes to a side's mean only if that side has
at least one n-gram of that order. Whitespace counts as a character.

Run from the repository root:

    python3 tools/chrf_oracle.py > crates/core/tests/data/chrf_cases.json
"""

import json
from collections import Counter


def ngrams(text, n):
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def chrf(pred_tokens, ref_tokens, max_n=6, beta=2.0):
    hyp = " ".join(pred_tokens)
    ref = " ".join(ref_tokens)
    if not hyp or not ref:
        return 0.0
    precisions = []
    recalls = []
    for n in range(1, max_n + 1):
        hyp_counts = ngrams(hyp, n)
        ref_counts = ngrams(ref, n)
        hyp_total = sum(hyp_counts.values())
        ref_total = sum(ref_counts.values())
        matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        if hyp_total > 0:
            precisions.append(matches / hyp_total)
        if ref_total > 0:
            recalls.append(matches / ref_total)
    if not precisions or not recalls:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    denom = beta * beta * p + r
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * p * r / denom


CASES = [
    (["get", "orange"], ["get", "apple"]),
    (["get", "apple"], ["get", "apple"]),
    (["count", "lines"], ["lines", "count"]),
    (["run"], ["run"]),
    (["set", "value"], ["get", "value"]),
    (["to", "string"], ["to", "string", "builder"]),
    (["parse", "http", "response"], ["parse", "http", "request"]),
    (["on", "create"], ["on", "destroy"]),
    (["is", "empty"], ["is", "not", "empty"]),
    (["find", "user", "by", "id"], ["find", "user", "by", "name"]),
    (["write", "bytes"], ["read", "bytes"]),
    (["close"], ["close", "quietly"]),
    (["init"], ["initialize"]),
    (["test", "should", "fail"], ["test", "should", "pass"]),
    (["get", "x"], ["get", "y"]),
    (["append", "child"], ["append", "children"]),
    (["hash", "code"], ["hash", "code"]),
    (["equals"], ["equals", "ignore", "case"]),
    (["next", "token"], ["peek", "token"]),
    (["load", "config"], ["load", "configuration"]),
    (["flush", "buffer"], ["clear", "buffer"]),
    (["add", "listener"], ["remove", "listener"]),
    (["create", "instance"], ["new", "instance"]),
    (["visit", "node"], ["visit", "tree", "node"]),
    (["max", "value"], ["min", "value"]),
    (["apply", "filter"], ["apply", "filters"]),
    (["handle", "event"], ["handle", "mouse", "event"]),
    (["copy", "of"], ["copy", "of", "range"]),
    (["index", "of"], ["last", "index", "of"]),
    (["start", "server"], ["stop", "server"]),
    (["decode", "base", "64"], ["encode", "base", "64"]),
    (["validate", "input"], ["validate"]),
    (["get", "get", "orange"], ["get", "apple"]),
    (["merge", "sorted", "lists"], ["merge", "lists"]),
    (["from", "json"], ["to", "json"]),
    (["resolve", "path"], ["resolve", "absolute", "path"]),
    (["unregister"], ["register"]),
    (["shutdown", "now"], ["shutdown"]),
    (["compare", "to"], ["compare"]),
    (["build", "tree"], ["rebuild", "tree"]),
    (["sort", "by", "key"], ["sort", "by", "value"]),
    (["wrap", "exception"], ["unwrap", "exception"]),
    (["fetch", "all", "rows"], ["fetch", "row"]),
    (["normalize", "whitespace"], ["normalize", "unicode"]),
    (["await", "termination"], ["awaits", "termination"]),
    (["id"], ["identifier"]),
    (["a"], ["b"]),
    (["ab"], ["ba"]),
    (["abc", "def"], ["abc", "xyz"]),
    (["supports", "batch", "updates"], ["supports", "batch", "updates"]),
]


def main():
    assert len(CASES) == 50, len(CASES)
    out = []
    for pred, ref in CASES:
        out.append(
            {
                "pred": pred,
                "ref": ref,
                "chrf": chrf(pred, ref),
            }
        )
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
