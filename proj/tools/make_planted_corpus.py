#!/usr/bin/env python3
"""Writes the planted-signal fixture corpus used by the end-to-end tests.

Priority is High when at least two of these hold: author followers >= 200,
events >= 6, the title mentions "crash". Comment counts are drawn
independently of priority.
"""
import argparse
import datetime as dt
import json
import pathlib
import random

REPOS = ["acme/engine", "acme/webui", "orbit/cli", "orbit/docs"]
WORDS = ("widget config parser render cache thread socket layout theme plugin "
         "sync export import upload session token button dialog schema query").split()
VERBS = "fails breaks hangs stalls freezes mislabels drops skips".split()
EVENTS = ["labeled", "assigned", "mentioned", "subscribed", "renamed", "milestoned", "referenced", "closed"]
OBJECTIVE = ["bug", "enhancement", "question"]
NOISE = ["stale", "pinned", "good first issue", "documentation", "usability", "needs triage"]
T0 = dt.datetime(2020, 1, 1, tzinfo=dt.timezone.utc)


def ts(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def issue(rng, repo, number):
    high_followers = rng.random() < 0.5
    busy = rng.random() < 0.5
    crash = rng.random() < 0.5
    high = (high_followers + busy + crash) >= 2

    subject = rng.choice(WORDS)
    if crash:
        title = f"{subject} crash when {rng.choice(WORDS)} is {rng.choice(['empty', 'large', 'missing'])}"
    else:
        title = f"{subject} {rng.choice(VERBS)} with {rng.choice(WORDS)} {rng.choice(WORDS)}"
    desc = " ".join(
        f"The {rng.choice(WORDS)} {rng.choice(VERBS)} after the {rng.choice(WORDS)} step."
        for _ in range(rng.randint(2, 5)))
    if rng.random() < 0.3:
        desc += " See https://example.org/log/%d for details." % rng.randint(1, 999)

    created = T0 + dt.timedelta(hours=rng.randint(0, 24 * 500))
    n_comments = rng.randint(0, 10)
    comments = []
    t = created
    for _ in range(n_comments):
        t += dt.timedelta(hours=rng.randint(1, 72))
        comments.append({"author_login": f"user{rng.randint(1, 30)}",
                         "body": f"I can reproduce this with the {rng.choice(WORDS)} enabled.",
                         "created_at": ts(t)})
    n_events = rng.randint(6, 10) if busy else rng.randint(0, 5)
    events = []
    for _ in range(n_events):
        t += dt.timedelta(hours=rng.randint(1, 24))
        events.append({"kind": rng.choice(EVENTS), "created_at": ts(t)})
    closed = t + dt.timedelta(hours=rng.randint(1, 48))
    updated = closed + dt.timedelta(hours=rng.randint(0, 200))

    labels = [rng.choice(OBJECTIVE), "priority: high" if high else "low priority"]
    if rng.random() < 0.4:
        labels.append(rng.choice(NOISE))
    author = f"dev{rng.randint(1, 60)}"
    return {
        "id": f"{repo}#{number}",
        "repo": repo,
        "title": title,
        "description": desc,
        "state": "closed",
        "created_at": ts(created),
        "closed_at": ts(closed),
        "updated_at": ts(updated),
        "labels": labels,
        "is_pull_request": rng.random() < 0.1,
        "milestone_present": rng.random() < 0.3,
        "assignee_present": rng.random() < 0.5,
        "comments": comments,
        "events": events,
        "author": {
            "login": author,
            "followers": rng.randint(200, 900) if high_followers else rng.randint(0, 199),
            "following": rng.randint(0, 300),
            "public_repos": rng.randint(0, 80),
            "public_gists": rng.randint(0, 20),
            "issue_count": rng.randint(0, 400),
            "github_contributions": rng.randint(0, 3000),
            "account_created_at": ts(T0 - dt.timedelta(days=rng.randint(30, 3000))),
            "repo_contributions": rng.randint(0, 50),
            "association": rng.choice(["None", "Contributor", "Collaborator", "Member", "Owner"]),
        },
        "closer_login": author if rng.random() < 0.3 else f"maint{rng.randint(1, 5)}",
        "referenced_commit": rng.random() < 0.3,
        "hydration_failed": False,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/planted/corpus.jsonl")
    ap.add_argument("--per-repo", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for repo in REPOS:
        for n in range(1, args.per_repo + 1):
            lines.append(json.dumps(issue(rng, repo, n), sort_keys=True))
    out.write_text("\n".join(lines) + "\n")
    meta = {"schema_version": 1,
            "provenance": {"source": "synthetic planted-signal fixture", "fetched_at": "2024-01-01T00:00:00Z"}}
    pathlib.Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


if __name__ == "__main__":
    main()
