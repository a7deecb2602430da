#!/usr/bin/env python3
"""Regenerates data/fixtures. Output is deterministic for a given --seed."""

import argparse
import hashlib
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

EPOCH = datetime(2022, 1, 3, 8, 0, 0, tzinfo=timezone.utc)

SERVICES = {
    # short name -> accepted kinds
    "vt": {"url", "ip", "domain", "hash"},
    "otx": {"url", "ip", "domain", "hash"},
    "urlhaus": {"url", "ip", "domain", "hash"},
    "mb": {"hash"},
    "misp": {"hash", "cve"},
    "nvd": {"cve"},
}
DATABASES = {"urlhaus", "mb", "misp", "nvd"}
HASH_KINDS = {32: "md5", 40: "sha1", 64: "sha256", 96: "sha3_384", 128: "sha512"}


def iso(ts):
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def family(kind):
    return "hash" if kind in HASH_KINDS.values() else kind


def dump_jsonl(path, kind, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as out:
        out.write(json.dumps({"$schema": "ctikit." + kind, "version": 1}, sort_keys=True) + "\n")
        for r in rows:
            out.write(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n")


def post(post_id, author, text, created, *, lang="en", retweet=False, source="Twitter Web App",
         hashtags=(), urls=(), counts=(0, 0, 0, 0)):
    return {
        "post_id": post_id,
        "author_id": author,
        "text": text,
        "created_at": iso(created),
        "lang": lang,
        "is_retweet": retweet,
        "source_label": source,
        "hashtags": sorted(set(hashtags)),
        "mentions": [],
        "urls": list(urls),
        "like_count": counts[0],
        "quote_count": counts[1],
        "reply_count": counts[2],
        "retweet_count": counts[3],
    }


class Planter:
    """Random indicators in canonical form plus their defanged spellings."""

    WORDS = ["secure", "login", "update", "cdn", "mail", "account", "verify", "portal", "files", "drive",
             "invoice", "bank", "cloud", "support", "auth", "docs", "sync", "office", "track", "pay"]
    TLDS = ["xyz", "top", "ru", "info", "com", "net", "online", "site", "club", "icu"]

    def __init__(self, rng):
        self.rng = rng

    def hex(self, n):
        return "".join(self.rng.choice("0123456789abcdef") for _ in range(n))

    def domain(self):
        r = self.rng
        return "{}-{}{}.{}".format(r.choice(self.WORDS), r.choice(self.WORDS), r.randint(1, 99), r.choice(self.TLDS))

    def ip(self):
        r = self.rng
        return "{}.{}.{}.{}".format(r.choice([45, 91, 103, 185, 193, 194, 212]), r.randint(1, 254),
                                    r.randint(1, 254), r.randint(1, 254))

    def url(self):
        r = self.rng
        host = self.domain() if r.random() < 0.8 else self.ip()
        path = "/" + r.choice(["wp-content/", "images/", "", "dl/"]) + r.choice(self.WORDS) + r.choice(
            [".php", ".exe", ".zip", ".html", ""])
        return r.choice(["http", "https"]) + "://" + host + path

    def cve(self):
        return "CVE-{}-{}".format(self.rng.randint(2017, 2023), self.rng.randint(1000, 49999))

    def hash(self):
        n = self.rng.choice([32, 40, 64, 64, 64, 128])
        return self.hex(n), HASH_KINDS[n]

    def defang(self, value, kind):
        r = self.rng
        if kind not in ("url", "ip", "domain") or r.random() < 0.5:
            return value
        out = value
        if kind == "url" and r.random() < 0.7:
            out = out.replace("http", "hxxp", 1)
        dot = r.choice(["[.]", "(.)", "[dot]"])
        if kind == "url":
            scheme, rest = out.split("://", 1)
            host, sep, tail = rest.partition("/")
            out = scheme + "://" + host.replace(".", dot) + sep + tail
        else:
            out = out.replace(".", dot)
        return out


SECURITY_TEMPLATES = [
    ("New #phishing kit hosted at {url} targeting bank customers", ["url"], ["phishing"]),
    ("Cobalt Strike beacon calling home to {ip} on 443 #threatintel", ["ip"], ["threatintel"]),
    ("#malware sample {hash} dropped by a fake invoice loader", ["hash"], ["malware"]),
    ("Patch now: {cve} is being actively exploited in the wild #infosec", ["cve"], ["infosec"]),
    ("Emotet distribution domain {domain} spotted again, block it #emotet", ["domain"], ["emotet"]),
    ("Ransomware payload {hash} fetched from {url} #ransomware", ["hash", "url"], ["ransomware"]),
    ("C2 infrastructure: {domain} resolves to {ip} #IOC", ["domain", "ip"], ["IOC"]),
    ("Exploit for {cve} released, scanning from {ip} observed #vulnerability", ["cve", "ip"], ["vulnerability"]),
    ("Credential harvesting page {url} still live, report it #phishing", ["url"], ["phishing"]),
    ("Qakbot dropper hash {hash} and staging server {domain} #malware", ["hash", "domain"], ["malware"]),
    ("Botnet scanning activity from {ip} exploiting {cve} #threatintel", ["ip", "cve"], ["threatintel"]),
    ("Malicious macro document downloads second stage from {url} #maldoc", ["url"], ["maldoc"]),
]

CHATTER = [
    "Great coffee this morning before the weekly team meeting",
    "Anyone watching the football match tonight? what a game",
    "Just finished a long run along the river, feeling good",
    "Our conference talk is now online {video} thanks for watching",
    "Lovely dinner with family, the pasta was amazing",
    "Reading a new novel about space travel, highly recommend",
    "Happy birthday to my brother, have a wonderful day",
    "The weather is beautiful today, going for a hike",
    "Hiring: we are looking for a frontend developer to join our office",
    "Slides from yesterday's meetup are here {social}",
    "Podcast episode about career growth and leadership is out",
    "Traffic was terrible on the way home, glad it is friday",
    "My cat refuses to get off the keyboard again",
    "Congrats to the whole team on the product launch",
    "Trying a new recipe for banana bread this weekend",
]
CHATTER_EXTRA = ["today", "honestly", "so fun", "cheers", "again", "finally", "with friends", "love it"]
NON_ENGLISH = [
    ("Nueva campaña de phishing detectada hoy", "es"),
    ("Neue Sicherheitslücke entdeckt, bitte aktualisieren", "de"),
    ("Nouvelle campagne de logiciels malveillants", "fr"),
    ("Nuova vulnerabilità critica scoperta", "it"),
    ("新しいマルウェアが検出されました", "ja"),
]
HUMAN_SOURCES = ["Twitter Web App", "Twitter for iPhone", "Twitter for Android", "TweetDeck"]
BOT_SOURCES = ["IFTTT", "dlvr.it", "threatfeed-bot"]


def make_accounts(rng, n_accounts, n_bots):
    accounts = []
    for i in range(n_accounts):
        is_bot = i < n_bots
        created = EPOCH - timedelta(days=rng.randint(20, 300) if is_bot else rng.randint(400, 4000))
        snapshot = datetime(2023, 1, 15, tzinfo=timezone.utc)
        if is_bot:
            followers, following = rng.randint(0, 80), rng.randint(200, 2000)
            if i == 0:
                followers, following = 0, 0
        else:
            followers, following = rng.randint(150, 20000), rng.randint(20, 900)
        accounts.append({
            "author_id": ("feedbot{:02d}" if is_bot else "analyst{:02d}").format(i),
            "bot": is_bot,
            "profile": {
                "author_id": ("feedbot{:02d}" if is_bot else "analyst{:02d}").format(i),
                "followers_count": followers,
                "following_count": following,
                "listed_count": rng.randint(0, 5) if is_bot else rng.randint(5, 400),
                "description": "" if is_bot and rng.random() < 0.6 else
                ("Automated feed of indicators" if is_bot else "Security researcher. Opinions my own."),
                "has_profile_image": (not is_bot) or rng.random() < 0.3,
                "protected": False,
                "verified": (not is_bot) and rng.random() < 0.15,
                "created_at": iso(created),
                "snapshot_at": iso(snapshot),
            },
        })
    return accounts


def make_corpus(rng, planter, accounts):
    posts, labels, planted = [], [], []
    t = EPOCH
    authors = [a for a in accounts][:30]
    next_id = [1500000000000000000]

    def new_id():
        next_id[0] += rng.randint(1, 1000)
        return str(next_id[0])

    for i in range(200):
        t += timedelta(minutes=rng.randint(60, 2600))
        author = rng.choice(authors)
        source = rng.choice(BOT_SOURCES if author["bot"] else HUMAN_SOURCES)
        counts = (rng.randint(0, 50), rng.randint(0, 5), rng.randint(0, 10), rng.randint(0, 30))
        slot = i % 20
        if slot in (5,):
            text, lang = NON_ENGLISH[(i // 20) % len(NON_ENGLISH)]
            posts.append(post(new_id(), author["author_id"], text, t, lang=lang, source=source))
            continue
        if slot == 11:
            posts.append(post(new_id(), author["author_id"], "RT @someone: " + rng.choice(CHATTER), t,
                              retweet=True, source=source))
            continue
        if slot == 17 and posts:
            # same text as an earlier English post, later timestamp
            earlier = next(p for p in reversed(posts) if p["lang"] == "en" and not p["is_retweet"])
            dup = dict(earlier, post_id=new_id(), created_at=iso(t), author_id=author["author_id"])
            posts.append(dup)
            continue
        if rng.random() < 0.62:
            template, kinds, tags = rng.choice(SECURITY_TEMPLATES)
            fills, urls = {}, []
            for kind in kinds:
                if kind == "hash":
                    value, sub = planter.hash()
                    planted.append((value, sub))
                    fills["hash"] = value if rng.random() < 0.7 else value.upper()
                    continue
                value = getattr(planter, kind)()
                planted.append((value, kind))
                fills[kind] = planter.defang(value, kind)
            text = template.format(**fills)
            if rng.random() < 0.15:
                text += " via https://twitter.com/{}/status/{}".format(author["author_id"], rng.randint(10**17, 10**18))
            if rng.random() < 0.1:
                extra = planter.url()
                planted.append((extra, "url"))
                urls.append(extra)
                short = "https://t.co/" + planter.hex(10)
                planted.append((short, "url"))
                text += " " + short
            posts.append(post(new_id(), author["author_id"], text, t, source=source, hashtags=tags, urls=urls,
                              counts=counts))
            labels.append((posts[-1]["post_id"], 1))
        else:
            text = rng.choice(CHATTER).format(video="https://www.youtube.com/watch?v=" + planter.hex(11),
                                              social="https://www.facebook.com/events/" + str(rng.randint(10**6, 10**7)))
            text += " " + rng.choice(CHATTER_EXTRA)
            posts.append(post(new_id(), author["author_id"], text, t, source=source, counts=counts))
            labels.append((posts[-1]["post_id"], 0))
    return posts, labels, planted


def make_timelines(rng, planter, accounts):
    timelines, scores = [], []
    pid = 1700000000000000000
    for acct in accounts:
        is_bot = acct["bot"]
        n = rng.randint(25, 60)
        t = EPOCH + timedelta(hours=rng.randint(0, 48))
        step = timedelta(hours=rng.choice([1, 2, 3, 6]))
        bot_source = rng.choice(BOT_SOURCES)
        posts = []
        for k in range(n):
            if is_bot:
                t += step + timedelta(seconds=rng.randint(0, 90))
                template, kinds, tags = rng.choice(SECURITY_TEMPLATES[:5])
                fills = {"url": planter.url(), "ip": planter.ip(), "hash": planter.hash()[0], "cve": planter.cve(),
                         "domain": planter.domain()}
                text = "[feed] " + template.format(**fills)
                source = bot_source
                retweet = False
                urls = [fills["url"]] if "url" in kinds else []
                counts = (rng.randint(0, 2), 0, 0, rng.randint(0, 2))
            else:
                t += timedelta(minutes=max(1.0, rng.expovariate(1 / 900.0)))
                retweet = rng.random() < 0.3
                words = rng.sample(CHATTER, 2)
                text = ("RT @peer: " if retweet else "") + words[0].format(video="", social="") + ". " + \
                    rng.choice(CHATTER_EXTRA) + " " + str(k)
                if rng.random() < 0.2:
                    text += " @colleague{} #{}".format(rng.randint(1, 9), rng.choice(["dfir", "infosec", "blue"]))
                source = rng.choice(HUMAN_SOURCES)
                urls = []
                counts = (rng.randint(0, 300), rng.randint(0, 20), rng.randint(0, 40), rng.randint(0, 120))
            pid += rng.randint(1, 1000)
            p = post(str(pid), acct["author_id"], text, t, retweet=retweet, source=source, urls=urls, counts=counts,
                     hashtags=[w[1:] for w in text.split() if w.startswith("#")])
            p["mentions"] = sorted({w[1:].rstrip(":") for w in text.split() if w.startswith("@")})
            posts.append(p)
        timelines.append({"account": acct["profile"], "posts": posts})
        score = rng.uniform(0.955, 0.995) if is_bot else rng.uniform(0.02, 0.85)
        if acct["author_id"] == "analyst49":
            score = 0.95  # exactly at the threshold counts as a bot label
        scores.append((acct["author_id"], round(score, 3)))
    return timelines, scores


def verdict_files(rng, planted, first_mention, out_dir):
    rows = 0
    for value, kind in sorted(set(planted)):
        fam = family(kind)
        malicious_weight = {"url": 0.5, "ip": 0.3, "domain": 0.55, "hash": 0.95, "cve": 0.97}[fam]
        bad = rng.random() < malicious_weight
        mention = first_mention.get(value)
        for short, kinds in SERVICES.items():
            if fam not in kinds:
                continue
            hit = bad and (rng.random() < 0.75 or short in ("vt", "nvd"))
            if short in DATABASES:
                status = "found" if hit else "not_found"
            else:
                status = "malicious" if hit else "clean"
            first_seen = None
            if hit and mention:
                first_seen = iso(mention + timedelta(days=rng.randint(-120, 60), hours=rng.randint(0, 23)))
            detail = {"vt": "engines {}/90".format(rng.randint(2, 40) if hit else 0), "otx": "pulses {}".format(
                rng.randint(1, 9) if hit else 0), "urlhaus": "malware_download" if hit else "no_results",
                "mb": "AgentTesla" if hit else "hash_not_found", "misp": "events {}".format(1 if hit else 0),
                "nvd": "published" if hit else "not found"}[short]
            v = {"ioc_value": value, "ioc_type": kind, "service": short, "status": status,
                 "first_seen": first_seen, "detail": detail}
            key = hashlib.sha256((short + "\n" + value).encode()).hexdigest()
            path = out_dir / short / (key + ".json")
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(v, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
            rows += 1
    return rows


def sha(s, n):
    digest = hashlib.sha512(s.encode()).hexdigest() + hashlib.sha512(("x" + s).encode()).hexdigest()
    return digest[:n]


def extraction_cases():
    """Hand-annotated posts: (text, url entities, expected [(value, type)])."""
    m1, m2 = sha("m1", 32), sha("m2", 32)
    s1 = sha("s1", 40)
    h1, h2 = sha("h1", 64), sha("h2", 64)
    x1 = sha("x1", 128)
    return [
        ("Phishing page at http://secure-login.example-bank.xyz/verify.php", [],
         [("http://secure-login.example-bank.xyz/verify.php", "url")]),
        ("Phishing page at hxxp://secure-login[.]example-bank[.]xyz/verify.php", [],
         [("http://secure-login.example-bank.xyz/verify.php", "url")]),
        ("Payload served from hxxps://cdn-update(.)top/dl/stage2.exe today", [],
         [("https://cdn-update.top/dl/stage2.exe", "url")]),
        ("C2 at 185.220.101.45 observed", [], [("185.220.101.45", "ip")]),
        ("C2 at 185[.]220[.]101[.]45 observed", [], [("185.220.101.45", "ip")]),
        ("Scanner 1[.]1[.]1[.]1 and 8.8.8.8 seen in logs", [], [("1.1.1.1", "ip"), ("8.8.8.8", "ip")]),
        ("Not an address: 256.1.1.1 or 10.0.0 or 1.2.3.4.5", [], []),
        ("Block evil-updates.top at the proxy", [], [("evil-updates.top", "domain")]),
        ("Block evil-updates[.]top and mail-verify[dot]ru", [],
         [("evil-updates.top", "domain"), ("mail-verify.ru", "domain")]),
        ("File named report.pdf and script.py are not domains", [], []),
        ("MD5 " + m1, [], [(m1, "md5")]),
        ("MD5 " + m1.upper() + " uppercase", [], [(m1, "md5")]),
        ("SHA1: " + s1, [], [(s1, "sha1")]),
        ("sha256 " + h1 + " #malware", [], [(h1, "sha256")]),
        ("two hashes " + h1 + " " + h2, [], [(h1, "sha256"), (h2, "sha256")]),
        ("sha512 " + x1, [], [(x1, "sha512")]),
        ("md5 " + m2 + ", sha256 " + h2 + ".", [], [(m2, "md5"), (h2, "sha256")]),
        ("Hex but wrong length " + sha("w", 50), [], []),
        ("Patch CVE-2021-44228 now", [], [("CVE-2021-44228", "cve")]),
        ("lowercase cve-2022-22965 spring4shell", [], [("CVE-2022-22965", "cve")]),
        ("CVE-2021-20180 and CVE-2023-123456 both fixed", [],
         [("CVE-2021-20180", "cve"), ("CVE-2023-123456", "cve")]),
        ("Not a CVE: CVE-21-1234 or CVE-2021-12", [], []),
        ("See https://twitter.com/someone/status/1234567890", [], []),
        ("Watch https://www.youtube.com/watch?v=abc123 and https://youtu.be/abc123", [], []),
        ("Event page https://m.facebook.com/events/1 and https://fb.me/x", [], []),
        ("Discussion on https://old.reddit.com/r/netsec/comments/abc", [], []),
        ("Excluded host as bare name twitter.com and reddit.com", [], []),
        ("Not excluded: https://nottwitter.com/login", [], [("https://nottwitter.com/login", "url")]),
        ("Short link https://t.co/abcdef expands", ["http://malicious-drop.site/payload.bin"],
         [("https://t.co/abcdef", "url"), ("http://malicious-drop.site/payload.bin", "url")]),
        ("Entity only", ["https://dropper-files.online/a.zip"], [("https://dropper-files.online/a.zip", "url")]),
        ("Entity excluded", ["https://twitter.com/i/web/status/1"], []),
        ("URL with IP host http://45.9.148.110/bins/x86 #botnet", [], [("http://45.9.148.110/bins/x86", "url")]),
        ("Defanged IP URL hxxp://45[.]9[.]148[.]110/bins/arm", [], [("http://45.9.148.110/bins/arm", "url")]),
        ("URL in parentheses (http://bad-site.xyz/path) here", [], [("http://bad-site.xyz/path", "url")]),
        ("URL ending a sentence http://bad-site.xyz/path.", [], [("http://bad-site.xyz/path", "url")]),
        ("Mixed case HTTP://Bad-Site.XYZ/Path", [], [("http://bad-site.xyz/Path", "url")]),
        ("Domain and IP: c2-panel.club -> 91.92.93.94", [], [("c2-panel.club", "domain"), ("91.92.93.94", "ip")]),
        ("Email contact abuse@example-corp.com is not a domain indicator", [], []),
        ("Repeated mention evil-updates.top evil-updates.top", [], [("evil-updates.top", "domain")]),
        ("Version 1.2.3 released, build 4.5 stable", [], []),
        ("Defanged scheme only hxxps://payload-host.icu/x", [], [("https://payload-host.icu/x", "url")]),
        ("Bracket colon hxxps[:]//stage-host.xyz/y", [], [("https://stage-host.xyz/y", "url")]),
        ("Full bracket scheme https[://]stage-host.xyz/z", [], [("https://stage-host.xyz/z", "url")]),
        ("Host inside URL is not a domain record https://only-url.info/a", [],
         [("https://only-url.info/a", "url")]),
        ("Everything: hxxp://mix[.]xyz/a 5.6.7.8 mix-two.ru " + m1 + " CVE-2020-0601", [],
         [("http://mix.xyz/a", "url"), ("5.6.7.8", "ip"), ("mix-two.ru", "domain"), (m1, "md5"),
          ("CVE-2020-0601", "cve")]),
        ("Leading zero octet 010.1.1.1 is rejected", [], []),
        ("Hash glued to word abc" + h1 + " is ignored", [], []),
        ("Unicode text café with domain cafe-malware.net", [], [("cafe-malware.net", "domain")]),
        ("Nothing to see here, just a normal sentence.", [], []),
        ("Ftp drop ftp://files-drop.net/pub/a.exe", [], [("ftp://files-drop.net/pub/a.exe", "url")]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "fixtures"))
    ap.add_argument("--seed", type=int, default=20220103)
    args = ap.parse_args()
    out = Path(args.out)
    rng = random.Random(args.seed)
    planter = Planter(rng)

    accounts = make_accounts(rng, 50, 18)
    posts, labels, planted = make_corpus(rng, planter, accounts)
    dump_jsonl(out / "corpus" / "posts.jsonl", "posts", posts)
    with (out / "corpus" / "relevance_labels.csv").open("w") as f:
        f.write("post_id,label\n")
        for pid, label in labels:
            f.write("{},{}\n".format(pid, label))

    first_mention = {}
    for p in posts:
        ts = datetime.strptime(p["created_at"], "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        for value, _ in planted:
            if value in p["text"] or value.upper() in p["text"] or value in p["urls"]:
                first_mention.setdefault(value, ts)
    # Defanged spellings do not contain the canonical value; fall back to corpus start.
    for value, _ in planted:
        first_mention.setdefault(value, EPOCH + timedelta(days=90))
    enrichment = out / "enrichment"
    if enrichment.exists():
        for f in sorted(enrichment.rglob("*.json")):
            f.unlink()
    verdict_files(rng, planted, first_mention, enrichment)

    timelines, scores = make_timelines(rng, planter, accounts)
    dump_jsonl(out / "accounts" / "timelines.jsonl", "timelines", timelines)
    with (out / "accounts" / "botness.csv").open("w") as f:
        f.write("author_id,botness\n")
        for author, score in scores:
            f.write("{},{}\n".format(author, score))

    ext_posts, expected = [], []
    t = datetime(2022, 6, 1, 12, 0, 0, tzinfo=timezone.utc)
    for i, (text, urls, iocs) in enumerate(extraction_cases()):
        pid = str(1600000000000000000 + i)
        ext_posts.append(post(pid, "annotator", text, t + timedelta(minutes=i), urls=urls))
        expected.append({"post_id": pid, "iocs": [{"value": v, "type": k} for v, k in iocs]})
    dump_jsonl(out / "extraction" / "posts.jsonl", "posts", ext_posts)
    dump_jsonl(out / "extraction" / "expected.jsonl", "expected_iocs", expected)

    (out / "pipeline.conf").write_text(
        "# Offline run over the shipped fixtures. Paths are relative to this file.\n"
        "posts = corpus/posts.jsonl\n"
        "lang = en\n"
        "relevance_labels = corpus/relevance_labels.csv\n"
        "services = all\n"
        "provider = fixture\n"
        "fixtures = enrichment\n"
        "timelines = accounts/timelines.jsonl\n"
        "botness = accounts/botness.csv\n"
        "bot_model = rf\n"
        "bot_trees = 50\n"
        "relevance_threshold = 0.5\n"
        "botness_threshold = 0.95\n"
        "seed = 42\n")


if __name__ == "__main__":
    main()
