#!/usr/bin/env python3
# Copyright 2026 The KIRO Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled SYNTHETIC fixture data under data/.

Nothing here is real Wikimedia data. Country distributions are mixtures of
a per-wiki "home" distribution and a world pool, with the mixing weight
solved by bisection so that each wiki's edit/view entropy lands near a
hand-picked target. The targets encode the qualitative pattern of the
published edit/view entropy scatter (Japanese views extremely concentrated,
English/Spanish/Arabic high on both axes, Cebuano/Waray edits diverse but
views concentrated, Egyptian Arabic views more diverse than edits).

For three wikis (ja, ceb, arz) the script also writes a recorded HTTP payload
corpus and, independently of the C++ ingestion code, the snapshot that
replaying that corpus must produce. Those snapshot files are the goldens the
replay test compares against byte for byte.

Usage: generate.py <repo>/data
"""

import json
import math
import random
import sys
import urllib.parse
from pathlib import Path

SEED = 20210401
WINDOW_START = "2021-04"
WINDOW_END = "2021-05"
WINDOW_LABEL = "2021-04"
CAPTURED_AT = "2021-05-01T00:00:00Z"
REPLAYED = ("ja", "ceb", "arz")
ELEVATED = ("bureaucrat", "checkuser", "oversight", "rollbacker", "sysop")

COUNTRIES = (
    "US GB IN CA AU DE FR JP RU BR ES MX IT NL PL SE CN TW HK KR ID PH VN TH MY "
    "EG SA DZ MA IQ AE JO TN IR TR UA BY KZ RS HR BA NO FI DK IS CZ SK HU RO BG "
    "GR IL PT AR CO CL PE VE BE CH AT IE NZ SG ZA NG KE PK BD LK NP").split()

# name: (articles, total_pages, edits, users, active, home{cc: w}, (edit S, view S), stub_category)
WIKIS = {
    "en": (6_300_000, 55_000_000, 1_020_000_000, 42_000_000, 125_000, {"US": 1}, (3.3, 3.0), "Category:Stub categories"),
    "ceb": (6_090_000, 9_200_000, 35_000_000, 110_000, 180, {"PH": 1}, (2.4, 0.9), None),
    "sv": (2_750_000, 6_900_000, 50_000_000, 800_000, 2_600, {"SE": 1}, (1.0, 0.9), "Kategori:Stubbar"),
    "de": (2_580_000, 7_400_000, 220_000_000, 3_900_000, 18_500, {"DE": 1}, (1.2, 1.2), None),
    "fr": (2_330_000, 12_100_000, 195_000_000, 4_300_000, 18_000, {"FR": 1}, (1.9, 1.9), "Catégorie:Ébauche"),
    "nl": (2_070_000, 4_500_000, 60_000_000, 1_100_000, 3_800, {"NL": 0.7, "BE": 0.3}, (1.1, 1.0), "Categorie:Beginnetje"),
    "ru": (1_730_000, 7_000_000, 125_000_000, 3_200_000, 11_000, {"RU": 1}, (1.6, 1.6), "Категория:Незавершённые статьи"),
    "it": (1_710_000, 7_200_000, 120_000_000, 2_100_000, 8_900, {"IT": 1}, (0.9, 0.8), "Categoria:Stub"),
    "es": (1_690_000, 7_600_000, 140_000_000, 6_300_000, 16_500, {"ES": 0.4, "MX": 0.3, "AR": 0.15, "CO": 0.15}, (2.6, 2.5), "Categoría:Wikipedia:Esbozos"),
    "pl": (1_480_000, 3_300_000, 62_000_000, 1_000_000, 4_400, {"PL": 1}, (0.7, 0.6), "Kategoria:Zalążki artykułów"),
    "war": (1_265_000, 2_900_000, 7_000_000, 50_000, 60, {"PH": 1}, (2.3, 0.8), None),
    "vi": (1_270_000, 19_000_000, 65_000_000, 900_000, 2_300, {"VN": 1}, (1.0, 0.7), "Thể loại:Sơ khai"),
    "ja": (1_260_000, 3_800_000, 87_000_000, 1_800_000, 14_000, {"JP": 1}, (0.6, 0.25), "Category:スタブ"),
    "zh": (1_180_000, 6_900_000, 66_000_000, 3_100_000, 8_700, {"TW": 0.5, "HK": 0.3, "CN": 0.2}, (1.8, 1.5), None),
    "arz": (1_300_000, 2_000_000, 8_000_000, 170_000, 220, {"EG": 1}, (1.0, 2.3), None),
    "ar": (1_090_000, 7_200_000, 58_000_000, 2_200_000, 5_400, {"EG": 0.3, "SA": 0.3, "DZ": 0.2, "MA": 0.2}, (2.6, 2.6), "تصنيف:بذرة"),
    "uk": (1_100_000, 3_800_000, 36_000_000, 580_000, 3_900, {"UA": 1}, (1.4, 1.2), "Категорія:Незавершені статті"),
    "pt": (1_060_000, 5_200_000, 59_000_000, 2_700_000, 7_600, {"BR": 0.7, "PT": 0.3}, (1.5, 1.4), "Categoria:!Esboços"),
    "fa": (800_000, 5_600_000, 32_000_000, 960_000, 4_600, {"IR": 1}, (1.3, 1.1), "رده:مقاله‌های خرد"),
    "ca": (690_000, 2_200_000, 30_000_000, 350_000, 1_500, {"ES": 1}, (1.4, 1.2), None),
    "sr": (660_000, 4_100_000, 28_000_000, 290_000, 900, {"RS": 1}, (1.5, 1.2), None),
    "id": (590_000, 3_200_000, 30_000_000, 2_300_000, 3_200, {"ID": 1}, (0.8, 0.5), "Kategori:Rintisan"),
    "no": (580_000, 1_500_000, 19_000_000, 520_000, 1_500, {"NO": 1}, (0.9, 0.8), "Kategori:Stubber"),
    "ko": (560_000, 2_500_000, 26_000_000, 780_000, 2_300, {"KR": 1}, (0.9, 0.7), None),
    "fi": (515_000, 1_300_000, 20_000_000, 480_000, 1_800, {"FI": 1}, (0.7, 0.6), "Luokka:Tyngät"),
    # below the default 500K threshold: stored and scored, never plotted
    "hu": (490_000, 1_600_000, 22_000_000, 510_000, 1_400, {"HU": 1}, (0.6, 0.5), "Kategória:Csonkok"),
    "he": (300_000, 1_400_000, 38_000_000, 440_000, 2_900, {"IL": 1}, (0.5, 0.4), None),
}

# Provider tables exist only for some wikis so absent cells appear in the matrix.
ORES_WIKIS = ("en", "fr", "ru", "pt", "fa", "nl", "sv", "uk", "ja", "es", "it", "pl", "ar")
RELIABILITY_WIKIS = ("en", "fr", "de", "es", "ru", "ja", "it", "pt")

rng = random.Random(SEED)


# ---------------------------------------------------------------------------
# canonical JSON (mirrors the library's format: sorted keys, compact,
# reals printed with 12 significant digits)

def fmt_real(v):
    if v == 0:
        return "0"
    return "%.12g" % v


def canon(v):
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite")
        return fmt_real(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(canon(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + canon(v[k]) for k in sorted(v)) + "}"
    raise TypeError(type(v))


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_json(path, value):
    write(path, canon(value) + "\n")


# ---------------------------------------------------------------------------
# distributions

def entropy(weights):
    total = sum(weights.values())
    return -sum((w / total) * math.log(w / total) for w in weights.values() if w > 0)


WORLD = {c: 1.0 / (rank + 1) ** 0.55 for rank, c in enumerate(COUNTRIES)}
_world_total = sum(WORLD.values())
WORLD = {c: w / _world_total for c, w in WORLD.items()}


def mixture(home, w):
    out = {c: w * p for c, p in WORLD.items()}
    for c, p in home.items():
        out[c] += (1 - w) * p
    return out


def solve_mixture(home, target):
    lo, hi = 0.0, 1.0
    if not entropy(mixture(home, 0.0)) <= target <= entropy(mixture(home, 1.0)):
        raise SystemExit(f"target entropy {target} unreachable for home {home}")
    for _ in range(80):
        mid = (lo + hi) / 2
        if entropy(mixture(home, mid)) < target:
            lo = mid
        else:
            hi = mid
    return mixture(home, (lo + hi) / 2)


def jitter(shares):
    """Small deterministic perturbation so no two wikis share a world profile."""
    out = {c: p * rng.uniform(0.85, 1.15) for c, p in shares.items()}
    total = sum(out.values())
    return {c: p / total for c, p in out.items()}


def integer_counts(shares, total):
    counts = {c: int(round(p * total)) for c, p in shares.items()}
    return {c: n for c, n in counts.items() if n > 0}


def bucket_label(n):
    if n < 1:
        return None
    lo = 10 ** int(math.floor(math.log10(n)))
    if lo == 1:
        return "1..9"
    return f"{lo}..{lo * 10 - 1}"


def bucket_estimate(label):
    if ".." not in label:
        return float(int(label))
    lo, hi = (int(x) for x in label.split(".."))
    return min(max(math.sqrt(lo) * math.sqrt(hi), float(lo)), float(hi))


# ---------------------------------------------------------------------------
# per-wiki synthetic facts

def build_wiki(code):
    articles, pages, edits, users, active, home, (edit_s, view_s), stub_cat = WIKIS[code]
    edit_shares = jitter(solve_mixture(home, edit_s))
    view_shares = jitter(solve_mixture(home, view_s))
    monthly_edits = max(edits // 230, 20_000)
    monthly_views = int(articles * rng.uniform(90, 260))
    edit_counts = integer_counts(edit_shares, monthly_edits)
    view_counts = integer_counts(view_shares, monthly_views)

    # active editors per country, split by activity level and privacy-bucketed
    editor_shares = jitter(solve_mixture(home, max(edit_s * 0.8, entropy(home) + 0.05)))
    levels = {}
    for level, frac in (("5..99-edits", 0.78), ("100..-edits", 0.22)):
        raw = integer_counts(editor_shares, active * frac)
        levels[level] = {c: bucket_label(n) for c, n in raw.items()}

    groups = {
        "sysop": max(3, int(active * rng.uniform(0.004, 0.02))),
        "bureaucrat": rng.randint(1, 12),
        "checkuser": rng.randint(0, 8),
        "oversight": rng.randint(0, 9),
        "rollbacker": int(active * rng.uniform(0.01, 0.09)),
    }
    stub = int(articles * rng.uniform(0.1, 0.55)) if stub_cat else None
    return {
        "code": code,
        "site": {"articles": articles, "pages": pages, "edits": edits, "users": users, "activeusers": active},
        "stub_category": stub_cat,
        "stub_pages": stub,
        "edit_counts": edit_counts,
        "view_counts": view_counts,
        "editor_levels": levels,
        "groups": groups,
        "filters_total": rng.randint(40, 260),
        "filters_enabled_frac": rng.uniform(0.4, 0.9),
        "blocked": int(users * rng.uniform(0.002, 0.03)),
        "curated": {
            "patrolling_tools": rng.randint(2, 14),
            "stewards_with_language": rng.randint(0, 9),
            "deletion_requests": int(articles * rng.uniform(0.00005, 0.0008)),
            "steward_requests": rng.randint(0, 40),
        },
    }


def user_sets(w):
    """Synthetic account names per elevated group; rollbackers overlap sysops."""
    code = w["code"]
    sets = {}
    next_id = 0
    for g in ELEVATED:
        n = w["groups"][g]
        names = []
        for _ in range(n):
            names.append(f"{code.capitalize()} user {next_id:05d}")
            next_id += 1
        sets[g] = names
    # a third of the rollbackers are also sysops (union < sum)
    overlap = sets["sysop"][: len(sets["sysop"]) // 3]
    sets["rollbacker"] = sets["rollbacker"][: len(sets["rollbacker"]) - len(overlap)] + overlap
    return sets


def elevated_union(sets):
    union = set()
    for g in ELEVATED:
        union.update(sets[g])
    return sorted(union)


def active_subset(names, code):
    sub = random.Random(f"{SEED}-{code}-active")
    return [n for n in names if sub.random() < 0.45]


# ---------------------------------------------------------------------------
# snapshot documents

def provider_tables(wikis):
    tables = {
        "ores_quality": {}, "source_reliability": {}, "citations": {}, "protection": {}, "controversiality": {},
    }
    for code, w in wikis.items():
        r = random.Random(f"{SEED}-{code}-providers")
        if code in ORES_WIKIS:
            tables["ores_quality"][code] = {"mean_quality": round(r.uniform(1.6, 3.4), 4)}
        if code in RELIABILITY_WIKIS:
            tables["source_reliability"][code] = {"reliable_share": round(r.uniform(0.55, 0.92), 4)}
        if code not in ("war", "ceb"):
            tables["citations"][code] = {"unreferenced_share": round(r.uniform(0.05, 0.45), 4)}
        tables["protection"][code] = {"protected_articles": float(int(w["site"]["articles"] * r.uniform(0.0005, 0.006)))}
        if code not in ("arz", "war", "ceb", "hu"):
            tables["controversiality"][code] = {"controversial_share": round(r.uniform(0.002, 0.03), 5)}
    return tables


def media_table(wikis):
    out = {}
    for code, w in wikis.items():
        if code == "war":
            continue  # no referral data: media cells stay absent
        r = random.Random(f"{SEED}-{code}-media")
        total = w["site"]["articles"] * r.uniform(60, 200)
        shares = {"search_engine": r.uniform(0.5, 0.8), "internal": r.uniform(0.1, 0.3),
                  "direct": r.uniform(0.05, 0.2), "social_media": r.uniform(0.002, 0.06),
                  "other_wiki": r.uniform(0.001, 0.02)}
        s = sum(shares.values())
        out[code] = {k: float(int(total * v / s)) for k, v in shares.items()}
    return out


def democracy_index():
    r = random.Random(f"{SEED}-democracy")
    scores = {}
    for c in COUNTRIES:
        if c in ("KZ", "BY", "VE", "NP"):
            continue  # uncovered countries exercise the coverage renormalization
        scores[c] = round(r.uniform(0.05, 0.95), 3)
    return {
        "description": "SYNTHETIC illustrative democracy-quality scores in [0,1]; not a published index",
        "scores": scores,
    }


def window_json():
    return {"start": WINDOW_START, "end": WINDOW_END}


def expected_snapshot(w, curated_entry, providers, media, warnings, editors_levels_used, filters_enabled,
                      group_counts):
    code = w["code"]
    site = w["site"]
    site_stats = {"articles": site["articles"], "total_pages": site["pages"], "edits": site["edits"],
                  "editors": site["users"], "active_editors": site["activeusers"]}
    if curated_entry.get("stub_category") and w["stub_pages"] is not None:
        site_stats["stub_articles"] = min(site["articles"], w["stub_pages"])

    governance = {"blocked_accounts": w["blocked"], "total_accounts": site["users"],
                  "deletion_requests": curated_entry["deletion_requests"],
                  "steward_requests": curated_entry["steward_requests"]}
    if filters_enabled is not None:
        governance["abusefilter_rules"] = filters_enabled

    active = {}
    for level in editors_levels_used:
        for c, label in w["editor_levels"][level].items():
            active[c] = active.get(c, 0.0) + bucket_estimate(label)

    distributions = [
        {"subject": "edits", "window": window_json(), "entries": {c: float(n) for c, n in w["edit_counts"].items()}},
        {"subject": "views", "window": window_json(), "entries": {c: float(n) for c, n in w["view_counts"].items()}},
        {"subject": "active_editors", "window": window_json(), "entries": active},
    ]
    scores = {"curated": {"patrolling_tools": float(curated_entry["patrolling_tools"]),
                          "stewards_with_language": float(curated_entry["stewards_with_language"])}}
    for provider, table in providers.items():
        if code in table:
            scores[provider] = {k: float(v) for k, v in table[code].items()}
    if code in media:
        scores["media_referrals"] = dict(media[code])
    return {
        "schema_version": 1, "wiki": code, "family": "wikipedia", "window": window_json(),
        "captured_at": CAPTURED_AT, "site_stats": site_stats, "group_counts": group_counts,
        "governance_stats": governance, "distributions": distributions, "external_scores": scores,
        "warnings": warnings,
    }


# ---------------------------------------------------------------------------
# recorded payload corpus

API = "https://{code}.wikipedia.org/w/api.php?action=query&format=json&formatversion=2&"
ANALYTICS = "https://wikimedia.org/api/rest_v1/metrics/"


def enc(text):
    return urllib.parse.quote(text, safe="-._~")


class Corpus:
    def __init__(self, root, code):
        self.root = root / code
        self.code = code
        self.n = 0

    def record(self, url, body, status=200, headers=None, name="x"):
        self.n += 1
        d = self.root / f"{self.n:03d}-{name}"
        req = {"url": url}
        if headers:
            req["response_headers"] = headers
        write(d / "request.json", json.dumps(req, ensure_ascii=False, indent=2) + "\n")
        write(d / "response.body", body if isinstance(body, str) else json.dumps(body, ensure_ascii=False))
        write(d / "response.status", f"{status}\n")

    def listing(self, query, list_key, rows, cont_key, cont_value, name, page=500):
        base = API.format(code=self.code) + query
        suffix = ""
        for start in range(0, max(len(rows), 1), page):
            chunk = rows[start:start + page]
            body = {"batchcomplete": True, "query": {list_key: chunk}}
            if start + page < len(rows):
                value = cont_value(start + page, rows)
                body["continue"] = {cont_key: value, "continue": "-||"}
                nxt = "&" + cont_key + "=" + enc(str(value)) + "&continue=" + enc("-||")
            else:
                nxt = None
            self.record(base + suffix, body, name=name)
            if nxt is None:
                break
            suffix = nxt

    def api_error(self, query, code, info, name):
        self.record(API.format(code=self.code) + query,
                    {"error": {"code": code, "info": info}, "servedby": "mw-api-ext.eqiad.main"}, name=name)


def record_wiki(root, w, curated_entry, plan):
    code = w["code"]
    c = Corpus(root, code)
    site = w["site"]
    siteinfo = {"batchcomplete": True, "query": {"statistics": {
        "pages": site["pages"], "articles": site["articles"], "edits": site["edits"], "images": 0,
        "users": site["users"], "activeusers": site["activeusers"], "admins": w["groups"]["sysop"], "jobs": 0}}}
    siteinfo_url = API.format(code=code) + "meta=siteinfo&siprop=statistics"
    if plan.get("siteinfo_503"):
        c.record(siteinfo_url, "<html><body>upstream connect error</body></html>", status=503, name="siteinfo")
    c.record(siteinfo_url, siteinfo, name="siteinfo")

    if curated_entry.get("stub_category"):
        c.record(API.format(code=code) + "prop=categoryinfo&titles=" + enc(curated_entry["stub_category"]),
                 {"batchcomplete": True, "query": {"pages": [{"ns": 14, "title": curated_entry["stub_category"],
                  "categoryinfo": {"size": w["stub_pages"] + 40, "pages": w["stub_pages"], "files": 0,
                                   "subcats": 40}}]}}, name="categoryinfo")

    sets = user_sets(w)
    group_counts = {}
    for g in ELEVATED:
        q = f"list=allusers&augroup={enc(g)}&aulimit=500"
        if g in plan.get("missing_groups", ()):
            c.api_error(q, "badvalue", f'Unrecognized value for parameter "augroup": {g}.', name=f"group-{g}")
            group_counts[g] = 0
            sets[g] = []
            continue
        rows = [{"userid": 1000 + i, "name": n} for i, n in enumerate(sets[g])]
        c.listing(q, "allusers", rows, "aufrom", lambda i, rs: rs[i]["name"], name=f"group-{g}")
        group_counts[g] = len(rows)
    union = elevated_union(sets)
    union_q = "list=allusers&augroup=" + enc("|".join(ELEVATED)) + "&aulimit=500"
    c.listing(union_q, "allusers", [{"userid": 1, "name": n} for n in union], "aufrom",
              lambda i, rs: rs[i]["name"], name="elevated-any")
    active = active_subset(union, code)
    c.listing(union_q + "&auactiveusers=1", "allusers",
              [{"userid": 1, "name": n, "recentactions": 3} for n in active], "aufrom",
              lambda i, rs: rs[i]["name"], name="elevated-active")
    group_counts["elevated:any"] = len(union)
    group_counts["elevated:active"] = len(active)

    filters_q = "list=abusefilters&abfprop=id%7Cstatus&abflimit=500"
    if plan.get("no_abusefilter"):
        c.api_error(filters_q, "badvalue", 'Unrecognized value for parameter "list": abusefilters.', name="filters")
        filters_enabled = None
    else:
        n_enabled = int(w["filters_total"] * w["filters_enabled_frac"])
        rows = []
        for i in range(w["filters_total"]):
            enabled = i < n_enabled
            deleted = (not enabled) and i % 3 == 0
            rows.append({"id": i + 1, "enabled": enabled, "deleted": deleted, "private": i % 7 == 0})
        c.listing(filters_q, "abusefilters", rows, "abfstartid", lambda i, rs: rs[i]["id"], name="filters")
        filters_enabled = n_enabled

    blocks_q = "list=blocks&bkprop=id%7Cuser&bkshow=account&bklimit=500"
    rows = [{"id": 90000 + i, "user": f"Blocked {code} {i:06d}"} for i in range(w["blocked"])]
    c.listing(blocks_q, "blocks", rows, "bkcontinue", lambda i, rs: f"20210430000000|{rs[i]['id']}", name="blocks")

    project = f"{code}.wikipedia"
    views_url = ANALYTICS + f"pageviews/top-by-country/{project}/all-access/2021/04"
    countries = [{"country": cc, "views": n, "rank": r + 1}
                 for r, (cc, n) in enumerate(sorted(w["view_counts"].items(), key=lambda kv: -kv[1]))]
    if plan.get("unknown_country_row"):
        countries.append({"country": "--", "views": 1234, "rank": len(countries) + 1})
    views_body = {"items": [{"project": project, "access": "all-access", "year": "2021", "month": "04",
                             "countries": countries}]}
    if plan.get("views_429"):
        c.record(views_url, '{"type":"https://mediawiki.org/wiki/HyperSwitch/errors/too_many_requests"}',
                 status=429, headers={"Retry-After": "2"}, name="views")
    c.record(views_url, views_body, name="views")

    edits_url = ANALYTICS + f"edits/by-country/{project}/all-editor-types/2021/04"
    c.record(edits_url, {"items": [{"project": project, "editor-type": "all-editor-types", "year": "2021",
                                    "month": "04", "results": [{"country": cc, "edits": n}
                                                               for cc, n in sorted(w["edit_counts"].items())]}]},
             name="edits")
    used_levels = []
    warnings = []
    if filters_enabled is None:
        warnings.append("abuse_filters: not available on this wiki")
    for level in ("5..99-edits", "100..-edits"):
        if level in plan.get("missing_levels", ()):
            warnings.append(f"editors_by_country: editors-by-country {code} 2021-04 ({level}): no data")
            continue  # not recorded: the replay transport answers 404
        url = ANALYTICS + f"editors/by-country/{project}/{level}/2021/04"
        c.record(url, {"items": [{"project": project, "activity-level": level, "year": "2021", "month": "04",
                                  "results": [{"country": cc, "editors": label}
                                              for cc, label in sorted(w["editor_levels"][level].items())]}]},
                 name="editors")
        used_levels.append(level)
    return group_counts, filters_enabled, used_levels, warnings


# ---------------------------------------------------------------------------

def direct_group_counts(w):
    sets = user_sets(w)
    union = elevated_union(sets)
    counts = {g: len(sets[g]) for g in ELEVATED}
    counts["elevated:any"] = len(union)
    counts["elevated:active"] = len(active_subset(union, w["code"]))
    return counts


def main():
    data = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "data"
    wikis = {code: build_wiki(code) for code in WIKIS}

    curated = {}
    for code, w in wikis.items():
        entry = dict(w["curated"])
        if w["stub_category"]:
            entry["stub_category"] = w["stub_category"]
        entry["provenance"] = "synthetic fixture value"
        curated[code] = entry
    write_json(data / "curated.json", curated)
    providers = provider_tables(wikis)
    for name, table in providers.items():
        write_json(data / "providers" / f"{name}.json", table)
    media = media_table(wikis)
    write_json(data / "media" / f"{WINDOW_LABEL}.json", media)
    write_json(data / "democracy_index.json", democracy_index())

    plans = {
        "ja": {"siteinfo_503": True, "unknown_country_row": True},
        "ceb": {"no_abusefilter": True, "missing_groups": ("oversight",), "views_429": True},
        "arz": {"missing_levels": ("100..-edits",)},
    }
    recorded = data / "fixtures" / "recorded"
    snapshots = data / "fixtures" / "snapshots"
    for code, w in wikis.items():
        if code in REPLAYED:
            w["blocked"] = min(w["blocked"], 2600)  # keeps the recorded corpus small
            groups, filters_enabled, levels, warnings = record_wiki(recorded, w, curated[code], plans[code])
        else:
            groups = direct_group_counts(w)
            filters_enabled = int(w["filters_total"] * w["filters_enabled_frac"])
            levels, warnings = ["5..99-edits", "100..-edits"], []
        snap = expected_snapshot(w, curated[code], providers, media, warnings, levels, filters_enabled, groups)
        write_json(snapshots / f"{code}.wikipedia.{WINDOW_LABEL}.snapshot.json", snap)

    # summary: realized entropies, for eyeballing the cohort shape
    rows = []
    for code, w in wikis.items():
        rows.append((code, w["site"]["articles"], entropy(w["edit_counts"]), entropy(w["view_counts"])))
    for code, articles, es, vs in sorted(rows, key=lambda r: r[0]):
        print(f"{code:4s} {articles:>9d}  edit S={es:.4f}  view S={vs:.4f}")


if __name__ == "__main__":
    main()
