#!/usr/bin/env python3
"""Writes the HTTP replay fixture consumed by the ingest tests."""
import json
import pathlib
import sys

BASE = "https://api.github.test"
LIST = "?state=closed&per_page=100&sort=created&direction=asc"


def user(login):
    return {"login": login, "id": 1, "type": "User"}


def issue(repo, n, login="alice", pr=False):
    j = {
        "number": n,
        "title": f"Issue {n} in {repo}",
        "body": f"Body of issue {n}." if n % 7 else None,
        "state": "closed",
        "created_at": "2021-01-%02dT10:00:00Z" % (1 + n % 28),
        "closed_at": "2021-03-%02dT10:00:00Z" % (1 + n % 28),
        "updated_at": "2021-04-%02dT10:00:00Z" % (1 + n % 28),
        "labels": [{"name": "bug"}, {"name": "priority: high" if n % 2 else "low priority"}],
        "milestone": {"title": "v1"} if n % 3 == 0 else None,
        "assignee": user("bob") if n % 4 == 0 else None,
        "assignees": [],
        "user": user(login),
        "author_association": "CONTRIBUTOR",
    }
    if pr:
        j["pull_request"] = {"url": f"{BASE}/repos/{repo}/pulls/{n}"}
    return j


def main(out):
    responses = []

    def add(path, body, status=200, link=None):
        r = {"url": BASE + path, "status": status, "body": json.dumps(body, sort_keys=True)}
        if link:
            r["headers"] = {"link": link}
        responses.append(r)

    repo = "octo/widgets"
    page1 = [issue(repo, n, pr=(n % 10 == 0)) for n in range(1, 101)]
    page2 = [issue(repo, n) for n in range(101, 151)]
    p2 = f"{BASE}/repos/{repo}/issues{LIST}&page=2"
    add(f"/repos/{repo}/issues{LIST}", page1, link=f'<{p2}>; rel="next", <{p2}>; rel="last"')
    add(f"/repos/{repo}/issues{LIST}&page=2", page2,
        link=f'<{BASE}/repos/{repo}/issues{LIST}&page=1>; rel="prev"')
    add(f"/repos/octo/empty/issues{LIST}", [])
    add(f"/repos/octo/missing/issues{LIST}", {"message": "Not Found"}, status=404)

    tiny = "octo/tiny"
    add(f"/repos/{tiny}/issues{LIST}", [issue(tiny, 1, "alice"), issue(tiny, 2, "ghost")])
    add(f"/repos/{tiny}/contributors?per_page=100", [{"login": "alice", "contributions": 12}])
    add("/users/alice", {"login": "alice", "followers": 31, "following": 4, "public_repos": 17,
                         "public_gists": 2, "created_at": "2015-06-01T00:00:00Z"})
    add("/search/issues?q=author:alice+type:issue&per_page=1", {"total_count": 7, "items": []})
    add("/search/commits?q=author:alice&per_page=1", {"total_count": 130, "items": []})
    add("/users/ghost", {"message": "Not Found"}, status=404)
    comments = [{"user": user(u), "body": b, "created_at": t} for u, b, t in [
        ("bob", "Can reproduce on main.", "2021-01-03T09:00:00Z"),
        ("carol", "Same here with the nightly build.", "2021-01-04T09:00:00Z"),
        ("bob", "Fixed by the parser patch.", "2021-01-06T12:30:00Z")]]
    add(f"/repos/{tiny}/issues/1/comments?per_page=100", comments)
    events = [
        {"event": "labeled", "actor": user("bob"), "created_at": "2021-01-02T11:00:00Z", "commit_id": None},
        {"event": "assigned", "actor": user("bob"), "created_at": "2021-01-02T11:05:00Z", "commit_id": None},
        {"event": "referenced", "actor": user("carol"), "created_at": "2021-01-05T08:00:00Z",
         "commit_id": "0f1e2d3c"},
        {"event": "closed", "actor": user("bob"), "created_at": "2021-03-02T10:00:00Z", "commit_id": None},
        {"event": "unsubscribed", "actor": user("carol"), "created_at": "2021-03-03T10:00:00Z",
         "commit_id": None},
    ]
    add(f"/repos/{tiny}/issues/1/events?per_page=100", events)
    add(f"/repos/{tiny}/issues/2/comments?per_page=100", [])
    add(f"/repos/{tiny}/issues/2/events?per_page=100", [])

    pathlib.Path(out).parent.mkdir(parents=True, exist_ok=True)
    pathlib.Path(out).write_text(json.dumps({"base_url": BASE, "responses": responses}, indent=1) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/github/replay.json")
