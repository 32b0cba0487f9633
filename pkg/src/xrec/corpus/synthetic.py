"""Synthetic review corpus with known preference structure.

Users carry a latent preference over aspects and a set of favorite
keyphrases per aspect; items carry a latent quality per aspect and a set
of salient keyphrases. Ratings blend aspect alignment with keyphrase
affinity (how many of the user's favorites the item is salient in), and
liked items get richer reviews (more aspects, more keyphrases per
sentence), so the rating signal and the mined keyphrase signal are
coupled the way critiquing assumes. Each sentence doubles as a marker
span, so the full pipeline (filtering, mining, vectorization, training)
runs on corpora whose ground truth we control.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .types import Review

ASPECT_BANKS: dict[str, list[str]] = {
    "service": ["staff", "breakfast", "reception", "manager", "waiter", "concierge",
                "porter", "barman", "housekeeping", "checkin"],
    "location": ["airport", "downtown", "beach", "museum", "station", "park",
                 "harbour", "market", "cathedral", "metro"],
    "value": ["price", "wifi", "quality", "upgrade", "discount", "rate",
              "parking", "minibar", "laundry", "buffet"],
    "room": ["bed", "balcony", "shower", "window", "fridge", "view",
             "bathroom", "carpet", "curtain", "pillow"],
    "cleanliness": ["linen", "towel", "floor", "sink", "mirror", "surface",
                    "tile", "bathtub", "vent", "counter"],
    "comfort": ["mattress", "sofa", "heating", "aircon", "lighting", "desk",
                "chair", "wardrobe", "kettle", "blanket"],
}

POSITIVE_ADJ = ["excellent", "wonderful", "comfortable", "pleasant", "superb",
                "fantastic", "lovely", "spotless", "modern", "quiet", "superior", "decent"]
NEGATIVE_ADJ = ["terrible", "awful", "noisy", "dirty", "cramped", "shabby",
                "disappointing", "rude", "slow", "broken", "outdated", "mediocre"]

# glue words are all function words so mining only sees keyphrases and
# adjectives as candidates
DEFAULT_TEMPLATES: tuple[tuple[str, ...], ...] = (
    ("the", "{kp}", "was", "very", "{adj}", "."),
    ("the", "{kp}", "and", "the", "{kp2}", "were", "{adj}", "."),
    ("very", "{adj}", "{kp}", "not", "far", "from", "the", "{kp2}", "."),
)


@dataclass
class SyntheticConfig:
    n_users: int = 200
    n_items: int = 100
    n_aspects: int = 4
    keyphrases_per_aspect: int = 6
    reviews_per_user: int = 25
    templates: tuple[tuple[str, ...], ...] = DEFAULT_TEMPLATES
    noise: float = 0.35
    kp_weight: float = 0.25
    seed: int = 0

    def __post_init__(self):
        for name in ("n_users", "n_items", "n_aspects", "keyphrases_per_aspect", "reviews_per_user"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be in [0, 1]")
        if not 0.0 <= self.kp_weight <= 1.0:
            raise ValueError("kp_weight must be in [0, 1]")
        if self.reviews_per_user > self.n_items:
            raise ValueError("reviews_per_user cannot exceed n_items")

    @property
    def k_total(self) -> int:
        return self.n_aspects * self.keyphrases_per_aspect


@dataclass
class SyntheticGroundTruth:
    aspects: list[str]
    keyphrases: dict[str, list[str]]  # aspect -> nouns used as true keyphrases
    user_prefs: np.ndarray  # (n_users, n_aspects), rows sum to 1
    item_quals: np.ndarray  # (n_items, n_aspects) in [0.1, 0.9]
    scores: np.ndarray  # (n_users, n_items) inner products
    user_ids: list[str] = field(default_factory=list)
    item_ids: list[str] = field(default_factory=list)


def _aspect_setup(cfg: SyntheticConfig) -> tuple[list[str], dict[str, list[str]]]:
    names = list(ASPECT_BANKS)
    aspects, banks = [], {}
    for a in range(cfg.n_aspects):
        if a < len(names) and cfg.keyphrases_per_aspect <= len(ASPECT_BANKS[names[a]]):
            aspects.append(names[a])
            banks[names[a]] = ASPECT_BANKS[names[a]][: cfg.keyphrases_per_aspect]
        else:
            name = f"aspect{a}"
            aspects.append(name)
            banks[name] = [f"topic{a}x{j}" for j in range(cfg.keyphrases_per_aspect)]
    return aspects, banks


def generate_synthetic_corpus(cfg: SyntheticConfig) -> tuple[list[Review], SyntheticGroundTruth]:
    rng = np.random.default_rng(cfg.seed)
    aspects, banks = _aspect_setup(cfg)
    n_a = cfg.n_aspects

    user_prefs = rng.dirichlet(np.full(n_a, 0.8), size=cfg.n_users)
    item_quals = rng.uniform(0.1, 0.9, size=(cfg.n_items, n_a))

    # stable per-entity keyphrase tastes: which nouns a user tends to mention
    # and which nouns characterize an item, per aspect
    kpa = cfg.keyphrases_per_aspect
    n_user_fav = max(2, kpa // 2)
    n_item_sal = max(2, kpa // 2)
    user_favs = {
        (u, a): set(rng.choice(kpa, size=n_user_fav, replace=False).tolist())
        for u in range(cfg.n_users)
        for a in range(n_a)
    }
    item_sals = {
        (i, a): set(rng.choice(kpa, size=n_item_sal, replace=False).tolist())
        for i in range(cfg.n_items)
        for a in range(n_a)
    }

    # keyphrase affinity: the preference-weighted share of the user's
    # favorites the item is salient in; blended into the score so liking
    # and mentions share a cause
    affinity = np.zeros((cfg.n_users, cfg.n_items))
    for u in range(cfg.n_users):
        for i in range(cfg.n_items):
            parts = [
                len(user_favs[(u, a)] & item_sals[(i, a)]) / n_user_fav
                for a in range(n_a)
            ]
            affinity[u, i] = float(user_prefs[u] @ np.asarray(parts))
    scores = (1.0 - cfg.kp_weight) * (user_prefs @ item_quals.T) + cfg.kp_weight * affinity

    user_ids = [f"u{u:04d}" for u in range(cfg.n_users)]
    item_ids = [f"i{i:04d}" for i in range(cfg.n_items)]
    reviews: list[Review] = []
    for u in range(cfg.n_users):
        items = rng.choice(cfg.n_items, size=cfg.reviews_per_user, replace=False)
        for j, i in enumerate(items):
            reviews.append(
                _make_review(cfg, rng, aspects, banks, user_favs, item_sals,
                             user_prefs[u], item_quals[i], scores[u, i], int(u), int(i),
                             user_ids[u], item_ids[i], timestamp=1_500_000_000 + j * 86_400)
            )

    truth = SyntheticGroundTruth(
        aspects=aspects,
        keyphrases=banks,
        user_prefs=user_prefs,
        item_quals=item_quals,
        scores=scores,
        user_ids=user_ids,
        item_ids=item_ids,
    )
    return reviews, truth


def _make_review(cfg, rng, aspects, banks, user_favs, item_sals, pref, qual, score,
                 u: int, i: int, user_id: str, item_id: str, timestamp: int) -> Review:
    n_a = cfg.n_aspects
    overall = float(np.clip(1.0 + 4.0 * float(score) + cfg.noise * rng.normal(), 1.0, 5.0))
    aspect_ratings = {
        aspects[a]: float(np.clip(1.0 + 4.0 * qual[a] + cfg.noise * rng.normal(), 1.0, 5.0))
        for a in range(n_a)
    }

    # reviewers elaborate on what they like: positive reviews cover more
    # aspects and use the denser two-keyphrase templates
    liked = overall >= 3.0
    n_mention = min(n_a, 3 if liked else 2)
    order = np.argsort(-(pref + 1e-3 * rng.random(n_a)))
    chosen = order[:n_mention]

    tokens: list[str] = []
    spans: list[tuple[str, int, int]] = []
    for a in chosen:
        aspect = aspects[a]
        bank = banks[aspect]
        # mention keyphrases shared between the user's taste and the item's
        # salient set when possible, so occurrences depend on both sides
        shared = sorted(user_favs[(u, a)] & item_sals[(i, a)])
        fallback = sorted(item_sals[(i, a)])
        pool = shared if shared else fallback
        kp1 = bank[pool[int(rng.integers(len(pool)))]]
        kp2_pool = fallback if len(fallback) > 1 else pool
        kp2 = bank[kp2_pool[int(rng.integers(len(kp2_pool)))]]
        adj_bank = POSITIVE_ADJ if qual[a] > 0.5 else NEGATIVE_ADJ
        adj = adj_bank[int(rng.integers(len(adj_bank)))]
        if liked:
            template = cfg.templates[int(rng.integers(len(cfg.templates)))]
        else:
            template = cfg.templates[0]
        sentence = [
            tok.replace("{kp2}", kp2).replace("{kp}", kp1).replace("{adj}", adj)
            for tok in template
        ]
        start = len(tokens)
        tokens.extend(sentence)
        spans.append((aspect, start, len(tokens)))

    return Review(
        review_id=f"r-{user_id}-{item_id}",
        user_id=user_id,
        item_id=item_id,
        timestamp=timestamp,
        overall_rating=overall,
        aspect_ratings=aspect_ratings,
        tokens=tokens,
        marker_spans=spans,
    )
