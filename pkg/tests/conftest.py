import pytest

from samplab import census, worldgen
from samplab.io import to_ms

WINDOW = ("2022-09-07", "2022-10-08")
AS_OF = "2022-09-07"


def make_user(**overrides):
    """A clean user that passes every default filter."""
    base = dict(
        user_id=overrides.pop("user_id", 12345),
        true_age="30-39",
        true_gender="m",
        true_state="OH",
        activity_rate=1.0,
        created_ms=to_ms("2015-01-01"),
        followers=100,
        friends=100,
        lifetime_tweets=500,
        is_bot=False,
        is_org=False,
        is_verified=False,
        is_protected=False,
        is_suspended=False,
        bio="coffee | hiking",
        primary_language="en",
        p_place_tag=0.5,
        p_coordinates=0.9,
    )
    base.update(overrides)
    return worldgen.SimUser(**base)


@pytest.fixture(scope="session")
def small_world():
    """10-state world with constant inclusion, shared across tests."""
    table = census.synthetic_table(10, 150_000, seed=3)
    world = worldgen.build_world(
        table, worldgen.InclusionDesign(kind="constant", base_rate=0.25), seed=17,
    )
    return table, world


@pytest.fixture(scope="session")
def small_stream(small_world):
    _, world = small_world
    return worldgen.simulate_month(world, WINDOW, seed=17)
