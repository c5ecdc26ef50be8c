import numpy as np
import pytest

from tcindex.matrices import SpecializationMatrix, WeightMatrix


def make_spec(arr, actors=None, categories=None):
    arr = np.asarray(arr)
    actors = actors or tuple(f"a{i}" for i in range(arr.shape[0]))
    categories = categories or tuple(f"c{j}" for j in range(arr.shape[1]))
    return SpecializationMatrix(
        actors=tuple(actors),
        categories=tuple(categories),
        m=arr,
        k_c0=arr.sum(axis=1),
        k_t0=arr.sum(axis=0),
    )


def make_weights(arr, actors=None, categories=None, counts=None):
    arr = np.asarray(arr, dtype=float)
    actors = actors or tuple(f"a{i}" for i in range(arr.shape[0]))
    categories = categories or tuple(f"c{j}" for j in range(arr.shape[1]))
    return WeightMatrix(
        actors=tuple(actors),
        categories=tuple(categories),
        weights=arr,
        actor_counts=counts,
    )


def is_connected(arr):
    from tcindex.complexity import bipartite_components

    n, _, _ = bipartite_components(make_spec(arr))
    return n == 1


def random_connected_spec(rng, n_actors, n_categories, density=0.35):
    """Seeded random binary matrix with no empty rows/columns, connected."""
    for _ in range(500):
        arr = (rng.random((n_actors, n_categories)) < density).astype(np.int8)
        if arr.sum(axis=1).min() == 0 or arr.sum(axis=0).min() == 0:
            continue
        if is_connected(arr):
            return make_spec(arr)
    raise RuntimeError("could not sample a connected matrix")


@pytest.fixture
def nested3():
    """The hand-checked nested 3x3 network."""
    return make_spec([[1, 1, 1], [1, 1, 0], [1, 0, 0]])


# ---------------------------------------------------------------------------
# synthetic corpus


SECTORS = {
    "C1": "Alpha", "C2": "Alpha", "C3": "Alpha",
    "C4": "Beta", "C5": "Beta", "C6": "Beta",
    "C7": "Gamma", "C8": "Gamma", "C9": "Gamma", "C10": "Gamma",
}

# one IPC subclass prefix per synthetic category
IPC_OF_CATEGORY = {
    "C1": "A01B", "C2": "B21C", "C3": "C07D", "C4": "D01F", "C5": "E04G",
    "C6": "F16H", "C7": "G06F", "C8": "H04L", "C9": "G01N", "C10": "H01M",
}

REGIONS = ["R1", "R2", "R3"]


def synthesize_corpus(
    n_records=1200, n_actors=40, seed=7, start_fy=1981, end_fy=2010
):
    """Deterministic synthetic corpus rows: every category present in every
    year band, actors specialized enough that binarization stays connected."""
    rng = np.random.default_rng(seed)
    cats = list(IPC_OF_CATEGORY)
    actors = [f"corp{i:03d}" for i in range(n_actors)]
    # Zipf-ish activity so the top-share filter bites
    activity = 1.0 / np.arange(1, n_actors + 1)
    activity /= activity.sum()
    home_cat = rng.integers(0, len(cats), size=n_actors)
    region_of = [REGIONS[i % len(REGIONS)] for i in range(n_actors)]
    rows = []
    for k in range(n_records):
        a = int(rng.choice(n_actors, p=activity))
        # mostly the actor's home category, sometimes anything
        if rng.random() < 0.6:
            cat = cats[home_cat[a]]
        else:
            cat = cats[int(rng.integers(0, len(cats)))]
        assignees = [actors[a]]
        regions = [region_of[a]]
        if rng.random() < 0.15:  # co-assignment
            b = int(rng.choice(n_actors, p=activity))
            if actors[b] not in assignees:
                assignees.append(actors[b])
                regions.append(region_of[b])
        fy = int(rng.integers(start_fy, end_fy + 1))
        ipc = IPC_OF_CATEGORY[cat] + " 17/30"
        rows.append(
            f"P{k:06d},{fy},{'|'.join(assignees)},{'|'.join(regions)},{ipc}"
        )
    header = "patent_id,fiscal_year,assignees,assignee_regions,primary_ipc"
    return header + "\n" + "\n".join(rows) + "\n"


def synthetic_concordance():
    """Concordance where each synthetic IPC subclass maps to its category."""
    lines = ["ipc_prefix,field_id,field_label,sector_label"]
    # 3-char prefixes so both raw IPC codes and 3-digit categories map
    for cat, ipc in IPC_OF_CATEGORY.items():
        lines.append(f"{ipc[:3]},{cat},Field {cat},{SECTORS[cat]}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "records.csv"
    path.write_text(synthesize_corpus())
    return path


@pytest.fixture
def concordance_file(tmp_path):
    path = tmp_path / "concordance.csv"
    path.write_text(synthetic_concordance())
    return path
