#!/usr/bin/env python3
"""Synthesize the bundled news-style human-written corpus.

The texts come from a seeded stochastic grammar with topic-conditioned
lexicons, so the corpus is reproducible without scraping anything. Content
words are drawn from synonym groups; the same groups are written out as the
bundled synonym dictionary, which keeps dictionary coverage of the corpus
high.

Usage: make_corpus.py [--seed N] [--out DIR] [--richness F] [--head-bias F]
"""

import argparse
import json
import os
import random

MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday",
        "Sunday"]

FIRST = """James Mary Robert Patricia John Jennifer Michael Linda David Elizabeth
William Barbara Richard Susan Joseph Jessica Thomas Sarah Charles Karen
Christopher Lisa Daniel Nancy Matthew Betty Anthony Margaret Mark Sandra Donald
Ashley Steven Kimberly Paul Emily Andrew Donna Joshua Michelle Kenneth Carol
Kevin Amanda Brian Dorothy George Melissa Timothy Deborah Ronald Stephanie
Edward Rebecca Jason Sharon Jeffrey Laura Ryan Cynthia Jacob Kathleen Gary Amy
Nicholas Angela Eric Shirley Jonathan Anna Stephen Brenda Larry Pamela Justin
Emma Scott Nicole Brandon Helen Benjamin Samantha Samuel Katherine Gregory
Christine Alexander Debra Frank Rachel Patrick Carolyn Raymond Janet Jack
Catherine Dennis Maria Jerry Heather Tyler Diane Aaron Ruth Jose Julie Adam
Olivia Nathan Joyce Henry Virginia Douglas Victoria Zachary Kelly Peter Lauren
Kyle Christina Ethan Joan Walter Evelyn Noah Judith Jeremy Megan Christian
Andrea Keith Cheryl Roger Hannah Terry Jacqueline Gerald Martha Harold Gloria
Sean Teresa Austin Ann Carl Sara Arthur Madison Lawrence Frances Dylan Kathryn
Jesse Janice Jordan Jean Bryan Abigail Billy Alice Joe Judy Bruce Sophia Gabriel
Grace Logan Denise Albert Amber Willie Doris Alan Marilyn Juan Danielle Wayne
Beverly Elijah Isabella Randy Theresa Roy Diana Vincent Natalie Ralph Brittany
Eugene Charlotte Russell Marie Bobby Kayla Mason Alexis Philip Lori""".split()

LAST = """Smith Johnson Williams Brown Jones Garcia Miller Davis Rodriguez Martinez
Hernandez Lopez Gonzalez Wilson Anderson Thomas Taylor Moore Jackson Martin Lee
Perez Thompson White Harris Sanchez Clark Ramirez Lewis Robinson Walker Young
Allen King Wright Scott Torres Nguyen Hill Flores Green Adams Nelson Baker Hall
Rivera Campbell Mitchell Carter Roberts Gomez Phillips Evans Turner Diaz Parker
Cruz Edwards Collins Reyes Stewart Morris Morales Murphy Cook Rogers Gutierrez
Ortiz Morgan Cooper Peterson Bailey Reed Kelly Howard Ramos Kim Cox Ward
Richardson Watson Brooks Chavez Wood James Bennett Gray Mendoza Ruiz Hughes
Price Alvarez Castillo Sanders Patel Myers Long Ross Foster Jimenez Powell
Jenkins Perry Russell Sullivan Bell Coleman Butler Henderson Barnes Gonzales
Fisher Vasquez Simmons Romero Jordan Patterson Alexander Hamilton Graham
Reynolds Griffin Wallace Moreno West Cole Hayes Bryant Herrera Gibson Ellis
Tran Medina Aguilar Stevens Murray Ford Castro Marshall Owens Harrison
Fernandez McDonald Woods Washington Kennedy Wells Vargas Henry Chen Freeman
Webb Tucker Guzman Burns Crawford Olson Simpson Porter Hunter Gordon Mendez
Silva Shaw Snyder Mason Dixon Munoz Hunt Hicks Holmes Palmer Wagner Black
Robertson Boyd Rose Stone Salazar Fox Warren Mills Meyer Rice Schmidt Garza
Daniels Ferguson Nichols Stephens Soto Weaver Ryan Gardner Payne Grant Dunn""".split()

CITIES = """Springfield Riverton Fairview Lakewood Greenville Bristol Clinton
Franklin Georgetown Madison Salem Ashland Oakdale Milford Kingston Dover
Arlington Burlington Manchester Oxford Chester Hudson Marion Newport Auburn
Jackson Lexington Milton Dayton Winchester Cleveland Clayton Jefferson Dalton
Hamilton Canton Lancaster Monroe Windsor Brookfield Westfield Hillsboro
Centerville Lebanon Plymouth Portland Richmond Troy Waverly Warren Shelby
Beaumont Carlisle Danville Easton Florence Glendale Hanover Harrison Kent
Lawrence Lincoln Marshall Medford Newton Norwood Pittsfield Quincy Rockport
Sheffield Stanton Trenton Vernon Wayne Weston Wilson Woodstock Yorktown""".split()

# Synonym groups.  The first member is the most common surface form; every
# member is a single token so substitution keeps word counts aligned.
ADJ = [
    ["new", "fresh", "novel", "recent"],
    ["large", "big", "huge", "major", "sizable"],
    ["small", "little", "modest", "minor", "slight"],
    ["important", "significant", "crucial", "vital", "key"],
    ["difficult", "hard", "tough", "challenging"],
    ["local", "regional", "nearby", "neighborhood"],
    ["public", "civic", "communal"],
    ["strong", "robust", "solid", "sturdy"],
    ["weak", "fragile", "feeble", "shaky"],
    ["rapid", "quick", "fast", "swift", "speedy"],
    ["slow", "gradual", "sluggish", "unhurried"],
    ["recent", "latest", "current"],
    ["long", "lengthy", "extended", "prolonged"],
    ["short", "brief", "quick"],
    ["early", "initial", "preliminary", "first"],
    ["final", "last", "concluding", "ultimate"],
    ["serious", "severe", "grave", "critical"],
    ["popular", "favored", "beloved", "celebrated"],
    ["expensive", "costly", "pricey"],
    ["cheap", "inexpensive", "affordable", "economical"],
    ["safe", "secure", "protected"],
    ["dangerous", "hazardous", "risky", "perilous"],
    ["clear", "obvious", "evident", "plain"],
    ["unusual", "uncommon", "rare", "atypical"],
    ["common", "frequent", "widespread", "routine"],
    ["broad", "wide", "extensive", "sweeping"],
    ["careful", "cautious", "prudent", "deliberate"],
    ["ambitious", "bold", "daring"],
    ["controversial", "disputed", "contentious", "divisive"],
    ["successful", "effective", "fruitful", "productive"],
    ["annual", "yearly"],
    ["additional", "extra", "further", "supplementary"],
    ["independent", "separate", "autonomous"],
    ["urgent", "pressing", "immediate"],
    ["temporary", "interim", "provisional", "transitional"],
    ["permanent", "lasting", "enduring", "durable"],
    ["modern", "contemporary", "updated", "advanced"],
    ["old", "aging", "outdated", "elderly"],
    ["quiet", "calm", "peaceful", "tranquil"],
    ["busy", "crowded", "hectic", "packed"],
    ["unexpected", "surprising", "sudden", "unforeseen"],
    ["detailed", "thorough", "comprehensive", "elaborate"],
    ["complex", "complicated", "intricate"],
    ["simple", "basic", "straightforward", "elementary"],
    ["fair", "equitable", "balanced", "just"],
    ["steady", "stable", "consistent", "constant"],
    ["sharp", "steep", "dramatic", "marked"],
    ["private", "personal", "confidential"],
    ["federal", "national"],
    ["historic", "landmark", "notable", "memorable"],
]

ADV = [
    ["quickly", "rapidly", "swiftly", "promptly"],
    ["slowly", "gradually", "steadily"],
    ["recently", "lately", "newly"],
    ["largely", "mostly", "mainly", "chiefly"],
    ["nearly", "almost", "roughly", "approximately"],
    ["already", "previously", "earlier"],
    ["finally", "eventually", "ultimately"],
    ["carefully", "cautiously", "closely"],
    ["sharply", "steeply", "dramatically"],
    ["quietly", "discreetly", "silently"],
    ["publicly", "openly"],
    ["repeatedly", "frequently", "often", "regularly"],
]

# (singular, plural) groups per topic.
NOUNS_GENERAL = [
    [("plan", "plans"), ("proposal", "proposals"), ("scheme", "schemes"), ("strategy", "strategies")],
    [("project", "projects"), ("initiative", "initiatives"), ("program", "programs"), ("effort", "efforts")],
    [("report", "reports"), ("study", "studies"), ("review", "reviews"), ("analysis", "analyses")],
    [("decision", "decisions"), ("ruling", "rulings"), ("verdict", "verdicts"), ("judgment", "judgments")],
    [("meeting", "meetings"), ("session", "sessions"), ("gathering", "gatherings"), ("assembly", "assemblies")],
    [("problem", "problems"), ("issue", "issues"), ("difficulty", "difficulties"), ("concern", "concerns")],
    [("change", "changes"), ("shift", "shifts"), ("adjustment", "adjustments"), ("revision", "revisions")],
    [("increase", "increases"), ("rise", "rises"), ("growth", "growths"), ("gain", "gains")],
    [("decline", "declines"), ("drop", "drops"), ("fall", "falls"), ("decrease", "decreases")],
    [("budget", "budgets"), ("allocation", "allocations"), ("funding", "fundings")],
    [("rule", "rules"), ("regulation", "regulations"), ("policy", "policies"), ("guideline", "guidelines")],
    [("community", "communities"), ("neighborhood", "neighborhoods"), ("district", "districts")],
    [("official", "officials"), ("administrator", "administrators"), ("representative", "representatives")],
    [("resident", "residents"), ("citizen", "citizens"), ("inhabitant", "inhabitants"), ("local", "locals")],
    [("worker", "workers"), ("employee", "employees"), ("staffer", "staffers")],
    [("leader", "leaders"), ("chief", "chiefs"), ("head", "heads"), ("director", "directors")],
    [("building", "buildings"), ("facility", "facilities"), ("structure", "structures")],
    [("center", "centers"), ("hub", "hubs"), ("complex", "complexes")],
    [("event", "events"), ("occasion", "occasions"), ("ceremony", "ceremonies")],
    [("goal", "goals"), ("aim", "aims"), ("objective", "objectives"), ("target", "targets")],
    [("risk", "risks"), ("threat", "threats"), ("danger", "dangers"), ("hazard", "hazards")],
    [("result", "results"), ("outcome", "outcomes"), ("finding", "findings")],
    [("price", "prices"), ("cost", "costs"), ("fee", "fees"), ("charge", "charges")],
    [("agreement", "agreements"), ("deal", "deals"), ("accord", "accords"), ("pact", "pacts")],
    [("survey", "surveys"), ("poll", "polls"), ("questionnaire", "questionnaires")],
    [("question", "questions"), ("query", "queries"), ("inquiry", "inquiries")],
    [("area", "areas"), ("region", "regions"), ("zone", "zones"), ("sector", "sectors")],
    [("system", "systems"), ("network", "networks"), ("framework", "frameworks")],
    [("statement", "statements"), ("announcement", "announcements"), ("declaration", "declarations")],
    [("investigation", "investigations"), ("probe", "probes"), ("inquiry", "inquiries"), ("examination", "examinations")],
]

TOPICS = {
    "economy": [
        [("company", "companies"), ("firm", "firms"), ("business", "businesses"), ("enterprise", "enterprises")],
        [("market", "markets"), ("exchange", "exchanges"), ("marketplace", "marketplaces")],
        [("investor", "investors"), ("shareholder", "shareholders"), ("stakeholder", "stakeholders")],
        [("profit", "profits"), ("earning", "earnings"), ("revenue", "revenues"), ("income", "incomes")],
        [("job", "jobs"), ("position", "positions"), ("post", "posts"), ("role", "roles")],
        [("factory", "factories"), ("plant", "plants"), ("mill", "mills"), ("workshop", "workshops")],
        [("loan", "loans"), ("credit", "credits"), ("mortgage", "mortgages")],
        [("tax", "taxes"), ("levy", "levies"), ("tariff", "tariffs"), ("duty", "duties")],
        [("store", "stores"), ("shop", "shops"), ("retailer", "retailers"), ("outlet", "outlets")],
        [("economist", "economists"), ("analyst", "analysts"), ("forecaster", "forecasters")],
        [("inflation", "inflations"), ("pricing", "pricings")],
        [("bank", "banks"), ("lender", "lenders"), ("creditor", "creditors")],
    ],
    "health": [
        [("hospital", "hospitals"), ("clinic", "clinics"), ("infirmary", "infirmaries")],
        [("doctor", "doctors"), ("physician", "physicians"), ("clinician", "clinicians")],
        [("nurse", "nurses"), ("caregiver", "caregivers"), ("attendant", "attendants")],
        [("patient", "patients"), ("case", "cases")],
        [("disease", "diseases"), ("illness", "illnesses"), ("sickness", "sicknesses"), ("ailment", "ailments")],
        [("vaccine", "vaccines"), ("inoculation", "inoculations"), ("shot", "shots")],
        [("treatment", "treatments"), ("therapy", "therapies"), ("remedy", "remedies"), ("cure", "cures")],
        [("outbreak", "outbreaks"), ("epidemic", "epidemics"), ("flareup", "flareups")],
        [("medicine", "medicines"), ("drug", "drugs"), ("medication", "medications")],
        [("researcher", "researchers"), ("scientist", "scientists"), ("investigator", "investigators")],
        [("symptom", "symptoms"), ("sign", "signs"), ("indication", "indications")],
    ],
    "education": [
        [("school", "schools"), ("academy", "academies"), ("institute", "institutes")],
        [("student", "students"), ("pupil", "pupils"), ("learner", "learners")],
        [("teacher", "teachers"), ("instructor", "instructors"), ("educator", "educators"), ("tutor", "tutors")],
        [("classroom", "classrooms"), ("lecture", "lectures"), ("class", "classes")],
        [("university", "universities"), ("college", "colleges"), ("campus", "campuses")],
        [("exam", "exams"), ("test", "tests"), ("assessment", "assessments"), ("quiz", "quizzes")],
        [("course", "courses"), ("curriculum", "curricula"), ("syllabus", "syllabi")],
        [("parent", "parents"), ("guardian", "guardians"), ("family", "families")],
        [("scholarship", "scholarships"), ("grant", "grants"), ("bursary", "bursaries")],
        [("library", "libraries"), ("archive", "archives")],
        [("principal", "principals"), ("dean", "deans"), ("superintendent", "superintendents")],
    ],
    "transport": [
        [("road", "roads"), ("street", "streets"), ("highway", "highways"), ("route", "routes")],
        [("bridge", "bridges"), ("overpass", "overpasses"), ("crossing", "crossings")],
        [("bus", "buses"), ("coach", "coaches"), ("shuttle", "shuttles")],
        [("train", "trains"), ("railway", "railways"), ("railroad", "railroads")],
        [("driver", "drivers"), ("motorist", "motorists"), ("commuter", "commuters")],
        [("airport", "airports"), ("airfield", "airfields"), ("terminal", "terminals")],
        [("traffic", "traffics"), ("congestion", "congestions")],
        [("station", "stations"), ("depot", "depots"), ("stop", "stops")],
        [("passenger", "passengers"), ("traveler", "travelers"), ("rider", "riders")],
        [("vehicle", "vehicles"), ("car", "cars"), ("automobile", "automobiles")],
        [("lane", "lanes"), ("track", "tracks"), ("path", "paths")],
    ],
    "weather": [
        [("storm", "storms"), ("tempest", "tempests"), ("gale", "gales")],
        [("flood", "floods"), ("deluge", "deluges"), ("inundation", "inundations")],
        [("rain", "rains"), ("rainfall", "rainfalls"), ("downpour", "downpours"), ("shower", "showers")],
        [("wind", "winds"), ("gust", "gusts"), ("breeze", "breezes")],
        [("forecast", "forecasts"), ("prediction", "predictions"), ("outlook", "outlooks")],
        [("temperature", "temperatures"), ("reading", "readings")],
        [("drought", "droughts"), ("dryness", "drynesses")],
        [("meteorologist", "meteorologists"), ("forecaster", "forecasters")],
        [("shelter", "shelters"), ("refuge", "refuges"), ("haven", "havens")],
        [("damage", "damages"), ("destruction", "destructions"), ("harm", "harms")],
        [("warning", "warnings"), ("alert", "alerts"), ("advisory", "advisories")],
    ],
    "sports": [
        [("team", "teams"), ("squad", "squads"), ("side", "sides"), ("club", "clubs")],
        [("player", "players"), ("athlete", "athletes"), ("competitor", "competitors")],
        [("coach", "coaches"), ("manager", "managers"), ("trainer", "trainers")],
        [("game", "games"), ("match", "matches"), ("contest", "contests"), ("fixture", "fixtures")],
        [("season", "seasons"), ("campaign", "campaigns")],
        [("fan", "fans"), ("supporter", "supporters"), ("spectator", "spectators")],
        [("stadium", "stadiums"), ("arena", "arenas"), ("field", "fields"), ("ground", "grounds")],
        [("victory", "victories"), ("win", "wins"), ("triumph", "triumphs")],
        [("defeat", "defeats"), ("loss", "losses"), ("setback", "setbacks")],
        [("championship", "championships"), ("tournament", "tournaments"), ("title", "titles")],
        [("injury", "injuries"), ("strain", "strains"), ("sprain", "sprains")],
    ],
    "technology": [
        [("software", "softwares"), ("application", "applications"), ("app", "apps"), ("program", "programs")],
        [("computer", "computers"), ("machine", "machines"), ("device", "devices")],
        [("engineer", "engineers"), ("developer", "developers"), ("programmer", "programmers"), ("technician", "technicians")],
        [("startup", "startups"), ("venture", "ventures")],
        [("user", "users"), ("customer", "customers"), ("client", "clients"), ("subscriber", "subscribers")],
        [("platform", "platforms"), ("service", "services"), ("tool", "tools")],
        [("data", "datasets"), ("information", "informations"), ("record", "records")],
        [("breach", "breaches"), ("hack", "hacks"), ("intrusion", "intrusions"), ("leak", "leaks")],
        [("chip", "chips"), ("processor", "processors"), ("semiconductor", "semiconductors")],
        [("update", "updates"), ("upgrade", "upgrades"), ("patch", "patches")],
        [("robot", "robots"), ("drone", "drones"), ("automaton", "automatons")],
    ],
    "environment": [
        [("river", "rivers"), ("stream", "streams"), ("creek", "creeks"), ("waterway", "waterways")],
        [("forest", "forests"), ("woodland", "woodlands"), ("grove", "groves")],
        [("park", "parks"), ("reserve", "reserves"), ("sanctuary", "sanctuaries")],
        [("pollution", "pollutions"), ("contamination", "contaminations"), ("waste", "wastes")],
        [("wildlife", "wildlives"), ("animal", "animals"), ("species", "species")],
        [("emission", "emissions"), ("discharge", "discharges"), ("release", "releases")],
        [("farmer", "farmers"), ("grower", "growers"), ("rancher", "ranchers")],
        [("crop", "crops"), ("harvest", "harvests"), ("yield", "yields")],
        [("activist", "activists"), ("campaigner", "campaigners"), ("advocate", "advocates")],
        [("energy", "energies"), ("power", "powers"), ("electricity", "electricities")],
        [("recycling", "recyclings"), ("reuse", "reuses")],
    ],
    "crime": [
        [("police", "police"), ("authorities", "authorities")],
        [("officer", "officers"), ("deputy", "deputies"), ("detective", "detectives"), ("trooper", "troopers")],
        [("suspect", "suspects"), ("defendant", "defendants"), ("accused", "accused")],
        [("crime", "crimes"), ("offense", "offenses"), ("violation", "violations")],
        [("court", "courts"), ("tribunal", "tribunals")],
        [("judge", "judges"), ("magistrate", "magistrates")],
        [("witness", "witnesses"), ("bystander", "bystanders"), ("onlooker", "onlookers")],
        [("robbery", "robberies"), ("theft", "thefts"), ("burglary", "burglaries"), ("heist", "heists")],
        [("arrest", "arrests"), ("detention", "detentions"), ("apprehension", "apprehensions")],
        [("lawyer", "lawyers"), ("attorney", "attorneys"), ("counsel", "counsels")],
        [("victim", "victims"), ("casualty", "casualties")],
    ],
    "culture": [
        [("museum", "museums"), ("gallery", "galleries"), ("exhibition", "exhibitions")],
        [("artist", "artists"), ("painter", "painters"), ("sculptor", "sculptors")],
        [("festival", "festivals"), ("fair", "fairs"), ("carnival", "carnivals"), ("celebration", "celebrations")],
        [("concert", "concerts"), ("performance", "performances"), ("show", "shows"), ("recital", "recitals")],
        [("musician", "musicians"), ("singer", "singers"), ("band", "bands")],
        [("film", "films"), ("movie", "movies"), ("picture", "pictures")],
        [("book", "books"), ("novel", "novels"), ("volume", "volumes")],
        [("audience", "audiences"), ("crowd", "crowds"), ("viewer", "viewers")],
        [("theater", "theaters"), ("venue", "venues"), ("hall", "halls")],
        [("author", "authors"), ("writer", "writers"), ("novelist", "novelists")],
        [("tradition", "traditions"), ("custom", "customs"), ("heritage", "heritages")],
    ],
}

# Verb groups: (base, past, participle, third person).
VERBS = [
    [("approve", "approved", "approved", "approves"), ("endorse", "endorsed", "endorsed", "endorses"), ("authorize", "authorized", "authorized", "authorizes"), ("sanction", "sanctioned", "sanctioned", "sanctions")],
    [("reject", "rejected", "rejected", "rejects"), ("dismiss", "dismissed", "dismissed", "dismisses"), ("refuse", "refused", "refused", "refuses"), ("decline", "declined", "declined", "declines")],
    [("announce", "announced", "announced", "announces"), ("unveil", "unveiled", "unveiled", "unveils"), ("reveal", "revealed", "revealed", "reveals"), ("disclose", "disclosed", "disclosed", "discloses")],
    [("expand", "expanded", "expanded", "expands"), ("extend", "extended", "extended", "extends"), ("broaden", "broadened", "broadened", "broadens"), ("enlarge", "enlarged", "enlarged", "enlarges")],
    [("reduce", "reduced", "reduced", "reduces"), ("cut", "cut", "cut", "cuts"), ("lower", "lowered", "lowered", "lowers"), ("trim", "trimmed", "trimmed", "trims")],
    [("improve", "improved", "improved", "improves"), ("enhance", "enhanced", "enhanced", "enhances"), ("boost", "boosted", "boosted", "boosts"), ("upgrade", "upgraded", "upgraded", "upgrades")],
    [("review", "reviewed", "reviewed", "reviews"), ("examine", "examined", "examined", "examines"), ("assess", "assessed", "assessed", "assesses"), ("evaluate", "evaluated", "evaluated", "evaluates")],
    [("support", "supported", "supported", "supports"), ("back", "backed", "backed", "backs"), ("champion", "championed", "championed", "champions")],
    [("criticize", "criticized", "criticized", "criticizes"), ("condemn", "condemned", "condemned", "condemns"), ("denounce", "denounced", "denounced", "denounces"), ("fault", "faulted", "faulted", "faults")],
    [("build", "built", "built", "builds"), ("construct", "constructed", "constructed", "constructs"), ("erect", "erected", "erected", "erects")],
    [("close", "closed", "closed", "closes"), ("shut", "shut", "shut", "shuts"), ("shutter", "shuttered", "shuttered", "shutters")],
    [("open", "opened", "opened", "opens"), ("launch", "launched", "launched", "launches"), ("inaugurate", "inaugurated", "inaugurated", "inaugurates")],
    [("delay", "delayed", "delayed", "delays"), ("postpone", "postponed", "postponed", "postpones"), ("defer", "deferred", "deferred", "defers")],
    [("fund", "funded", "funded", "funds"), ("finance", "financed", "financed", "finances"), ("sponsor", "sponsored", "sponsored", "sponsors")],
    [("replace", "replaced", "replaced", "replaces"), ("substitute", "substituted", "substituted", "substitutes"), ("supplant", "supplanted", "supplanted", "supplants")],
    [("investigate", "investigated", "investigated", "investigates"), ("probe", "probed", "probed", "probes"), ("study", "studied", "studied", "studies")],
    [("protect", "protected", "protected", "protects"), ("shield", "shielded", "shielded", "shields"), ("safeguard", "safeguarded", "safeguarded", "safeguards"), ("defend", "defended", "defended", "defends")],
    [("create", "created", "created", "creates"), ("establish", "established", "established", "establishes"), ("form", "formed", "formed", "forms"), ("found", "founded", "founded", "founds")],
    [("complete", "completed", "completed", "completes"), ("finish", "finished", "finished", "finishes"), ("conclude", "concluded", "concluded", "concludes")],
    [("raise", "raised", "raised", "raises"), ("increase", "increased", "increased", "increases"), ("lift", "lifted", "lifted", "lifts"), ("hike", "hiked", "hiked", "hikes")],
    [("restore", "restored", "restored", "restores"), ("repair", "repaired", "repaired", "repairs"), ("renovate", "renovated", "renovated", "renovates"), ("fix", "fixed", "fixed", "fixes")],
    [("host", "hosted", "hosted", "hosts"), ("organize", "organized", "organized", "organizes"), ("stage", "staged", "staged", "stages")],
    [("address", "addressed", "addressed", "addresses"), ("tackle", "tackled", "tackled", "tackles"), ("handle", "handled", "handled", "handles")],
    [("track", "tracked", "tracked", "tracks"), ("monitor", "monitored", "monitored", "monitors"), ("watch", "watched", "watched", "watches"), ("observe", "observed", "observed", "observes")],
]

SAY = ["said", "stated", "noted", "added", "explained", "remarked", "commented", "observed"]
BELIEVE = ["believe", "think", "expect", "predict", "suspect", "fear", "hope"]
TITLES = [["spokesperson", "spokesman", "spokeswoman", "representative"],
          ["director", "head", "chief", "manager"],
          ["chair", "chairperson", "chairman", "chairwoman"],
          ["analyst", "expert", "specialist", "consultant"],
          ["coordinator", "organizer", "supervisor"],
          ["professor", "lecturer", "academic"]]
ORG_HEADS = {
    "economy": ["Chamber of Commerce", "Board of Trade", "Development Agency", "Finance Department", "Retail Association"],
    "health": ["Health Department", "Medical Center", "Public Health Office", "Nursing Association", "Hospital Board"],
    "education": ["School Board", "Education Department", "Teachers Union", "Parents Association", "University Council"],
    "transport": ["Transit Authority", "Highway Department", "Rail Commission", "Airport Authority", "Traffic Bureau"],
    "weather": ["Weather Service", "Emergency Management Office", "Climate Center", "Flood Control District", "Red Cross Chapter"],
    "sports": ["Athletic Association", "Sports Council", "Football League", "Baseball Club", "Recreation Department"],
    "technology": ["Technology Council", "Innovation Lab", "Software Alliance", "Data Protection Office", "Digital Agency"],
    "environment": ["Parks Department", "Conservation Society", "Environmental Agency", "Water Authority", "Farm Bureau"],
    "crime": ["Police Department", "Sheriff Office", "District Attorney Office", "Public Defender Office", "Court Administration"],
    "culture": ["Arts Council", "Historical Society", "Museum Board", "Film Society", "Library Foundation"],
}
CONNECTIVES = ["but", "and", "although", "while", "because", "since", "though", "whereas"]
TIME_UNITS = [["months", "weeks", "years"], ["days", "weeks"]]
QUANT = ["several", "many", "some", "few", "numerous", "dozens of", "hundreds of", "thousands of"]
REACT = ["welcomed", "questioned", "praised", "opposed", "challenged", "applauded", "doubted", "disputed"]
FEEL = ["worried", "optimistic", "frustrated", "hopeful", "concerned", "confident", "skeptical", "pleased", "surprised", "disappointed"]


HEAD_BIAS = 0.55


def restrict(richness):
    """Keeps the first fraction of every open-class pool (names, places, groups)."""
    global FIRST, LAST, CITIES, ADJ, ADV, NOUNS_GENERAL, VERBS
    def cut(xs):
        return xs[:max(2, round(len(xs) * richness))]
    FIRST, LAST, CITIES = cut(FIRST), cut(LAST), cut(CITIES)
    ADJ, ADV, NOUNS_GENERAL, VERBS = cut(ADJ), cut(ADV), cut(NOUNS_GENERAL), cut(VERBS)
    for t in TOPICS:
        TOPICS[t] = cut(TOPICS[t])


class Writer:
    def __init__(self, rng, topic):
        self.r = rng
        self.topic = topic
        self.nouns = NOUNS_GENERAL + TOPICS[topic]
        self.topic_nouns = TOPICS[topic]
        self.city = rng.choice(CITIES)
        self.org = "the " + self.city + " " + rng.choice(ORG_HEADS[topic])
        self.people = []

    def pick(self, group):
        # Skewed toward the head word: real prose reuses common forms.
        r = self.r.random()
        if r < HEAD_BIAS:
            return group[0]
        return self.r.choice(group)

    def adj(self):
        return self.pick(self.r.choice(ADJ))

    def adv(self):
        return self.pick(self.r.choice(ADV))

    def noun(self, plural=False, topic=False):
        pool = self.topic_nouns if topic or self.r.random() < 0.6 else self.nouns
        sg, pl = self.pick(self.r.choice(pool))
        return pl if plural else sg

    def verb(self, form):
        v = self.pick(self.r.choice(VERBS))
        return v[{"base": 0, "past": 1, "part": 2, "third": 3}[form]]

    def np(self, plural=None, det=True):
        if plural is None:
            plural = self.r.random() < 0.4
        n = self.noun(plural)
        parts = []
        if self.r.random() < 0.55:
            parts.append(self.adj())
        parts.append(n)
        if not det:
            return " ".join(parts)
        if plural:
            d = self.r.choice(["the", "the", "their", "these", "its", "many", "some"])
        else:
            d = self.r.choice(["the", "the", "the", "a", "its", "this", "their"])
            if d == "a" and parts[0][0] in "aeiou":
                d = "an"
        return d + " " + " ".join(parts)

    def person(self):
        if self.people and self.r.random() < 0.45:
            first, last = self.r.choice(self.people)
            return last if self.r.random() < 0.7 else first + " " + last
        first, last = self.r.choice(FIRST), self.r.choice(LAST)
        self.people.append((first, last))
        return first + " " + last

    def title(self):
        return self.pick(self.r.choice(TITLES))

    def number(self):
        r = self.r.random()
        if r < 0.3:
            return str(self.r.randint(2, 99))
        if r < 0.55:
            return str(self.r.randint(100, 9999))
        if r < 0.75:
            return "$" + str(self.r.randint(1, 95)) + "." + str(self.r.randint(1, 9)) + " " + self.r.choice(["million", "billion"])
        if r < 0.9:
            return str(self.r.randint(2, 60)) + " percent"
        return self.r.choice(["two", "three", "four", "five", "six", "seven", "eight", "ten", "twelve"])

    def when(self):
        r = self.r.random()
        if r < 0.35:
            return "on " + self.r.choice(DAYS)
        if r < 0.6:
            return "in " + self.r.choice(MONTHS)
        if r < 0.75:
            return "last " + self.r.choice(["week", "month", "year", "spring", "summer", "fall", "winter"])
        if r < 0.9:
            return "earlier this " + self.r.choice(["week", "month", "year"])
        return "in " + str(self.r.randint(1995, 2023))

    def clause(self):
        t = self.r.randrange(8)
        if t == 0:
            return f"{self.np()} would {self.verb('base')} {self.np()}"
        if t == 1:
            return f"{self.np()} had {self.adv()} {self.verb('part')} {self.np()}"
        if t == 2:
            return f"{self.np(plural=True)} {self.verb('past')} {self.np()} {self.when()}"
        if t == 3:
            return f"{self.np(plural=False)} {self.verb('third')} {self.np()}"
        if t == 4:
            return f"{self.np()} was {self.verb('part')} by {self.np()}"
        if t == 5:
            return f"{self.number()} {self.noun(True, topic=True)} were {self.verb('part')} {self.when()}"
        if t == 6:
            return f"{self.np()} could {self.verb('base')} {self.np()} within {self.r.choice(['a', 'two', 'three', 'six'])} {self.r.choice(TIME_UNITS[0])}"
        return f"the {self.noun()} remained {self.adj()} despite {self.np()}"

    def sentence(self, first=False):
        r = self.r
        if first:
            t = r.randrange(4)
            if t == 0:
                s = f"{self.city}, {self.org} {r.choice(['announced', 'said', 'confirmed', 'reported'])} {self.when()} that {self.clause()}."
            elif t == 1:
                s = f"{self.org} {self.verb('past')} {self.np()} {self.when()}, {r.choice(CONNECTIVES)} {self.clause()}."
            elif t == 2:
                s = f"{r.choice(QUANT)} {self.noun(True, topic=True)} in {self.city} {self.verb('past')} {self.np()} {self.when()}."
            else:
                s = f"{self.np(plural=False)} in {self.city} {r.choice(['is', 'was'])} {self.verb('part')} {self.when()} after {self.np()}."
            return cap(s)
        t = r.randrange(16)
        if t == 0:
            s = f"\"{cap(self.clause())},\" {r.choice(SAY)} {self.person()}, {self.title()} at {self.org}."
        elif t == 1:
            s = f"{self.person()} {r.choice(SAY)} that {self.clause()}."
        elif t == 2:
            s = f"According to {self.np()}, {self.clause()}."
        elif t == 3:
            s = f"{self.np(plural=True)} {r.choice(BELIEVE)} that {self.clause()}."
        elif t == 4:
            s = f"{self.np()} {r.choice(REACT)} {self.np()}, {r.choice(CONNECTIVES)} {self.clause()}."
        elif t == 5:
            s = f"{r.choice(QUANT)} {self.noun(True, topic=True)} {r.choice(['were', 'remained', 'seemed', 'appeared'])} {r.choice(FEEL)} about {self.np()}."
        elif t == 6:
            s = f"The {self.noun()} {self.verb('past')} {self.number()} {self.when()}, {r.choice(['up', 'down'])} from {self.number()} a year earlier."
        elif t == 7:
            s = f"{self.org} {r.choice(['plans', 'hopes', 'intends', 'expects'])} to {self.verb('base')} {self.np()} by {r.choice(MONTHS)}."
        elif t == 8:
            s = f"{self.clause()}, {r.choice(SAY)} {self.person()}."
        elif t == 9:
            s = f"In {self.city}, {self.clause()}."
        elif t == 10:
            s = f"{self.person()}, {r.choice(['a', 'the'])} {self.adj()} {self.title()}, {self.verb('past')} {self.np()} {r.choice(['and', 'but'])} {self.verb('past')} {self.np()}."
        elif t == 11:
            s = f"{self.np()} is {self.adv()} {self.verb('part')} {r.choice(['in', 'across', 'near', 'outside'])} {self.city}."
        elif t == 12:
            s = f"{r.choice(['Meanwhile', 'However', 'Still', 'Separately', 'Moreover', 'Instead', 'Nevertheless'])}, {self.clause()}."
        elif t == 13:
            s = f"{self.np(plural=True)} {self.verb('past')} {self.np()}, {r.choice(['saying', 'arguing', 'claiming', 'warning'])} that {self.clause()}."
        elif t == 14:
            s = f"It {r.choice(['was', 'is', 'remains'])} {r.choice(['unclear', 'uncertain', 'not known', 'too early to say'])} whether {self.clause()}."
        else:
            s = f"{self.np()} {r.choice(['will', 'may', 'might', 'should'])} {self.verb('base')} {self.np()} {r.choice(['next', 'this', 'later this'])} {r.choice(['week', 'month', 'year', 'season'])}."
        return cap(s)

    def document(self, n_sentences):
        out = [self.sentence(first=True)]
        for _ in range(n_sentences - 1):
            out.append(self.sentence())
        return " ".join(out)


def cap(s):
    if s.startswith('"'):
        return '"' + s[1:2].upper() + s[2:]
    return s[:1].upper() + s[1:]


def make_docs(rng, count, prefix):
    docs = []
    topics = sorted(TOPICS)
    for i in range(count):
        topic = rng.choice(topics)
        w = Writer(rng, topic)
        text = w.document(rng.randint(7, 10))
        docs.append({"id": f"{prefix}-{i:05d}", "text": text, "label": "HWT",
                     "generator_tag": f"human/news/{topic}", "prompt": ""})
    return docs


def write_jsonl(path, docs):
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")


def write_dictionary(path, full):
    groups = []
    for g in full["ADJ"] + full["ADV"]:
        groups.append(list(g))
    topics = full["TOPICS"]
    for g in full["NOUNS_GENERAL"] + [g for t in sorted(topics) for g in topics[t]]:
        groups.append([w for w, _ in g])
        groups.append([w for _, w in g])
    for g in full["VERBS"]:
        for k in range(4):
            groups.append([v[k] for v in g])
    for g in TITLES:
        groups.append(list(g))
    entries = {}
    for g in groups:
        members = []
        for w in g:
            if w not in members:
                members.append(w)
        for w in members:
            syns = [s for s in members if s != w]
            if not syns:
                continue
            cur = entries.setdefault(w, [])
            for s in syns:
                if s not in cur:
                    cur.append(s)
    with open(path, "w", encoding="utf-8") as f:
        for head in sorted(entries):
            f.write(head + "\t" + ",".join(entries[head]) + "\n")
    return len(entries)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--richness", type=float, default=0.3)
    ap.add_argument("--head-bias", type=float, default=0.55)
    args = ap.parse_args()
    global HEAD_BIAS
    HEAD_BIAS = args.head_bias
    # The dictionary covers the full lexicon, including words the corpus may not use.
    full = {"ADJ": ADJ, "ADV": ADV, "NOUNS_GENERAL": NOUNS_GENERAL, "VERBS": VERBS,
            "TOPICS": {t: list(v) for t, v in TOPICS.items()}}
    restrict(args.richness)
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    train = make_docs(rng, 800, "train")
    evals = make_docs(rng, 100, "eval")
    test = make_docs(rng, 100, "test")
    write_jsonl(os.path.join(args.out, "news_train.jsonl"), train)
    write_jsonl(os.path.join(args.out, "news_eval.jsonl"), evals)
    write_jsonl(os.path.join(args.out, "news_test.jsonl"), test)
    mini_rng = random.Random(args.seed + 1)
    write_jsonl(os.path.join(args.out, "mini_train.jsonl"), make_docs(mini_rng, 40, "mtrain"))
    write_jsonl(os.path.join(args.out, "mini_test.jsonl"), make_docs(mini_rng, 10, "mtest"))
    n = write_dictionary(os.path.join(args.out, "synonyms.tsv"), full)
    print(f"wrote {len(train)}/{len(evals)}/{len(test)} documents and {n} dictionary entries")


if __name__ == "__main__":
    main()
