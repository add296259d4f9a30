from __future__ import annotations

import pytest

from accabet.ingest import load_season
from util import season_csv


@pytest.fixture(scope="session")
def small_season_path(tmp_path_factory):
    """Six-team league: 10 matchdays of 3 fixtures, all five bookmakers."""
    path = tmp_path_factory.mktemp("data") / "E0.csv"
    path.write_text(season_csv(league="E0", teams=6, seed=7))
    return path


@pytest.fixture(scope="session")
def small_pools(small_season_path):
    return load_season([small_season_path])


@pytest.fixture(scope="session")
def full_season_path(tmp_path_factory):
    """Twenty-team league: the classic 38-matchday calendar."""
    path = tmp_path_factory.mktemp("data") / "E0-full.csv"
    path.write_text(season_csv(league="E0", teams=20, seed=11))
    return path


@pytest.fixture(scope="session")
def full_pools(full_season_path):
    return load_season([full_season_path])


@pytest.fixture(scope="session")
def four_league_paths(tmp_path_factory):
    """Four concurrent leagues, one of them 18 teams (34 matchdays)."""
    directory = tmp_path_factory.mktemp("data-multi")
    paths = []
    for league, teams in (("E0", 20), ("SP1", 20), ("I1", 20), ("D1", 18)):
        path = directory / f"{league}.csv"
        path.write_text(season_csv(league=league, teams=teams, seed=23))
        paths.append(path)
    return paths


@pytest.fixture(scope="session")
def four_league_pools(four_league_paths):
    return load_season(four_league_paths)
