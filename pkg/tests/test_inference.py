import numpy as np
import pytest

from samplab import census, geo, inference
from samplab.errors import DataError
from conftest import make_user


def users_with(age="30-39", gender="m", n=1000, **kw):
    return [make_user(user_id=i, true_age=age, true_gender=gender, **kw)
            for i in range(n)]


def test_identity_spec_is_oracle(small_world):
    _, world = small_world
    sample = world[:2000]
    labeled = inference.infer_all(sample, inference.ConfusionSpec.identity(), seed=1)
    for l in labeled:
        assert l.age == l.user.true_age
        assert l.gender == l.user.true_gender
        assert l.org == l.user.is_org
        assert l.state == l.user.true_state


def test_gender_confusion_flip_fraction():
    spec = inference.ConfusionSpec(
        age_matrix=tuple(tuple(r) for r in np.eye(4)),
        gender_matrix=((0.9, 0.1), (0.1, 0.9)),
        org_matrix=tuple(tuple(r) for r in np.eye(2)),
    )
    males = users_with(gender="m", n=100_000)
    labeled = inference.infer_demographics(males, spec, seed=2)
    frac_f = sum(l.gender == "f" for l in labeled) / len(labeled)
    sd = np.sqrt(0.1 * 0.9 / len(labeled))
    assert abs(frac_f - 0.1) < 3 * sd


def test_org_row_certainty():
    spec = inference.ConfusionSpec(
        age_matrix=tuple(tuple(r) for r in np.eye(4)),
        gender_matrix=tuple(tuple(r) for r in np.eye(2)),
        org_matrix=((1.0, 0.0), (0.0, 1.0)),
    )
    orgs = users_with(n=200, is_org=True)
    labeled = inference.infer_demographics(orgs, spec, seed=3)
    assert all(l.org for l in labeled)
    assert inference.drop_org_labeled(labeled) == []


def test_location_accuracy_extremes():
    spec_perfect = inference.ConfusionSpec.identity()
    users = users_with(n=500)
    labeled = inference.infer_location(users, spec_perfect, seed=4)
    assert all(l.state == "OH" for l in labeled)

    spec_never = inference.ConfusionSpec(
        age_matrix=spec_perfect.age_matrix,
        gender_matrix=spec_perfect.gender_matrix,
        org_matrix=spec_perfect.org_matrix,
        location_accuracy=0.0,
    )
    labeled = inference.infer_location(users, spec_never, seed=4)
    assert all(l.state != "OH" for l in labeled)
    assert all(l.state in geo.STATES for l in labeled)


def test_location_accuracy_rate():
    spec = inference.ConfusionSpec(
        age_matrix=inference.ConfusionSpec.identity().age_matrix,
        gender_matrix=inference.ConfusionSpec.identity().gender_matrix,
        org_matrix=inference.ConfusionSpec.identity().org_matrix,
        location_accuracy=0.8,
    )
    users = users_with(n=100_000)
    labeled = inference.infer_location(users, spec, seed=5)
    frac = sum(l.state == "OH" for l in labeled) / len(labeled)
    sd = np.sqrt(0.8 * 0.2 / len(labeled))
    assert abs(frac - 0.8) < 3 * sd


def test_neighbor_state_error_model():
    ident = inference.ConfusionSpec.identity()
    spec = inference.ConfusionSpec(
        age_matrix=ident.age_matrix, gender_matrix=ident.gender_matrix,
        org_matrix=ident.org_matrix, location_accuracy=0.0,
        location_error_model=inference.NEIGHBOR_STATE,
    )
    ohio = users_with(n=300, true_state="OH")
    labeled = inference.infer_location(ohio, spec, seed=6)
    assert all(l.state in geo.ADJACENCY["OH"] for l in labeled)
    # no-neighbor states fall back to a uniform other state
    alaska = [make_user(user_id=i, true_state="AK") for i in range(100)]
    labeled = inference.infer_location(alaska, spec, seed=7)
    assert all(l.state != "AK" for l in labeled)


def test_marginal_distribution_matches_channel():
    # observed age distribution = truth distribution x confusion matrix
    m = ((0.7, 0.1, 0.1, 0.1),
         (0.05, 0.8, 0.1, 0.05),
         (0.1, 0.1, 0.7, 0.1),
         (0.0, 0.1, 0.2, 0.7))
    ident = inference.ConfusionSpec.identity()
    spec = inference.ConfusionSpec(age_matrix=m, gender_matrix=ident.gender_matrix,
                                   org_matrix=ident.org_matrix)
    users = []
    uid = 0
    truth_shares = {"le18": 0.1, "19-29": 0.3, "30-39": 0.4, "ge40": 0.2}
    for age, share in truth_shares.items():
        for _ in range(int(share * 50_000)):
            users.append(make_user(user_id=uid, true_age=age))
            uid += 1
    labeled = inference.infer_demographics(users, spec, seed=8)
    observed = np.array([
        sum(l.age == a for l in labeled) / len(labeled) for a in census.AGE_BRACKETS
    ])
    truth_vec = np.array([truth_shares[a] for a in census.AGE_BRACKETS])
    expected = truth_vec @ np.array(m)
    assert np.allclose(observed, expected, atol=0.01)


def test_invalid_matrices_rejected():
    with pytest.raises(DataError, match="sum to 1"):
        inference.ConfusionSpec(
            age_matrix=((0.5, 0.5, 0.0, 0.1),) * 4,
            gender_matrix=((1, 0), (0, 1)),
            org_matrix=((1, 0), (0, 1)),
        )
    with pytest.raises(DataError, match="negative"):
        inference.ConfusionSpec(
            age_matrix=tuple(tuple(r) for r in np.eye(4)),
            gender_matrix=((1.5, -0.5), (0, 1)),
            org_matrix=((1, 0), (0, 1)),
        )
    with pytest.raises(DataError, match="accuracy"):
        inference.ConfusionSpec(
            age_matrix=tuple(tuple(r) for r in np.eye(4)),
            gender_matrix=((1, 0), (0, 1)),
            org_matrix=((1, 0), (0, 1)),
            location_accuracy=1.2,
        )


def test_spec_json_roundtrip(tmp_path):
    spec = inference.ConfusionSpec.identity()
    path = tmp_path / "spec.json"
    import json
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh)
    assert inference.ConfusionSpec.from_json(path) == spec


def test_labeled_dict_roundtrip():
    l = inference.LabeledUser(user=make_user(), age="le18", gender="f",
                              org=False, state="VT")
    d = inference.labeled_to_dict(l)
    back = inference.labeled_from_dict(d)
    assert back.user == l.user
    assert (back.age, back.gender, back.org, back.state) == ("le18", "f", False, "VT")


def test_determinism(small_world):
    _, world = small_world
    sample = world[:1000]
    spec = inference.ConfusionSpec(
        age_matrix=((0.7, 0.1, 0.1, 0.1),) * 4,
        gender_matrix=((0.9, 0.1), (0.2, 0.8)),
        org_matrix=tuple(tuple(r) for r in np.eye(2)),
        location_accuracy=0.5,
    )
    a = inference.infer_all(sample, spec, seed=11)
    b = inference.infer_all(sample, spec, seed=11)
    assert [(l.age, l.gender, l.state) for l in a] == [(l.age, l.gender, l.state) for l in b]
