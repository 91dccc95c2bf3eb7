import json
import re
from datetime import date
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from chatmonitor.api import create_app
from chatmonitor.auth import TokenStore
from chatmonitor.config import load_config
from chatmonitor.models import Period
from chatmonitor.rank_stats import members_cdf, top_content, weekly_volume

FULL_FROM, FULL_TO = "2021-02-22", "2021-03-07"
ALL_KINDS = ("image", "video", "audio", "text")

PROTECTED_GETS = [
    f"/api/top?from={FULL_FROM}&to={FULL_TO}&kind=image",
    "/api/content/anything",
    "/api/media/" + "0" * 32,
    "/api/stats/members_cdf",
    "/api/stats/weekly_volume",
]


@pytest.fixture(scope="session")
def api(small_fixture, small_dataset) -> SimpleNamespace:
    config = load_config(small_fixture.config)
    app = create_app(small_dataset, config)
    account = small_fixture.manifest["accounts"][0]
    return SimpleNamespace(
        client=TestClient(app),
        config=config,
        dataset=small_dataset,
        manifest=small_fixture.manifest,
        username=account["username"],
        password=account["password"],
    )


@pytest.fixture(scope="session")
def auth(api) -> dict:
    response = api.client.post(
        "/api/login", json={"username": api.username, "password": api.password}
    )
    assert response.status_code == 200
    return {"Authorization": f"Bearer {response.json()['token']}"}


class TestLogin:
    def test_good_credentials(self, api):
        response = api.client.post(
            "/api/login", json={"username": api.username, "password": api.password}
        )
        assert response.status_code == 200
        body = response.json()
        assert re.fullmatch(r"[0-9a-f]{64}", body["token"])
        assert body["expires_in_seconds"] == api.config.token_ttl_seconds

    def test_wrong_password(self, api):
        response = api.client.post(
            "/api/login", json={"username": api.username, "password": "nope"}
        )
        assert response.status_code == 401
        assert response.json() == {
            "code": "bad_credentials",
            "message": "unknown username or wrong password",
        }

    def test_unknown_username_same_answer(self, api):
        known = api.client.post(
            "/api/login", json={"username": api.username, "password": "nope"}
        )
        unknown = api.client.post(
            "/api/login", json={"username": "ghost", "password": "nope"}
        )
        assert unknown.status_code == 401
        assert unknown.json() == known.json()

    @pytest.mark.parametrize(
        "body",
        [
            b"not json",
            b"{}",
            b'{"username": "analyst"}',
            b'{"username": 5, "password": "x"}',
            b'{"username": "x", "password": null}',
        ],
    )
    def test_malformed_body(self, api, body):
        response = api.client.post(
            "/api/login", content=body, headers={"Content-Type": "application/json"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_request"

    def test_token_grants_access(self, api):
        token = api.client.post(
            "/api/login", json={"username": api.username, "password": api.password}
        ).json()["token"]
        response = api.client.get(
            "/api/stats/weekly_volume", headers={"Authorization": f"Bearer {token}"}
        )
        assert response.status_code == 200


class TestAuthRequired:
    @pytest.mark.parametrize("path", PROTECTED_GETS)
    def test_no_header(self, api, path):
        response = api.client.get(path)
        assert response.status_code == 401
        assert response.json()["code"] == "unauthorized"

    @pytest.mark.parametrize("path", PROTECTED_GETS)
    def test_wrong_scheme(self, api, path):
        response = api.client.get(path, headers={"Authorization": "Basic abc"})
        assert response.status_code == 401

    def test_garbage_token(self, api):
        response = api.client.get(
            "/api/stats/weekly_volume", headers={"Authorization": "Bearer bogus"}
        )
        assert response.status_code == 401
        assert response.json()["code"] == "unauthorized"

    def test_expired_token(self, small_fixture, small_dataset):
        config = load_config(small_fixture.config)
        clock = SimpleNamespace(now=0.0)
        tokens = TokenStore(ttl_seconds=60, clock=lambda: clock.now)
        client = TestClient(create_app(small_dataset, config, token_store=tokens))
        account = small_fixture.manifest["accounts"][0]
        token = client.post(
            "/api/login",
            json={"username": account["username"], "password": account["password"]},
        ).json()["token"]
        headers = {"Authorization": f"Bearer {token}"}
        assert client.get("/api/stats/weekly_volume", headers=headers).status_code == 200
        clock.now = 61.0
        response = client.get("/api/stats/weekly_volume", headers=headers)
        assert response.status_code == 401
        assert response.json()["code"] == "token_expired"


class TestTop:
    def _get(self, api, auth, **params):
        return api.client.get("/api/top", params=params, headers=auth)

    def test_matches_direct_ranking(self, api, auth):
        period = Period(date(2021, 2, 22), date(2021, 3, 7))
        for kind in ALL_KINDS:
            response = self._get(api, auth, **{"from": FULL_FROM, "to": FULL_TO,
                                               "kind": kind, "limit": 200})
            assert response.status_code == 200
            body = response.json()
            entries = top_content(api.dataset.clusters, api.dataset.messages,
                                  period, kind, 200)
            assert [
                (e["rank"], e["cluster_id"], e["period_share_count"],
                 e["period_distinct_groups"], e["period_distinct_senders"])
                for e in body
            ] == [
                (e.rank, e.cluster_id, e.period_share_count,
                 e.period_distinct_groups, e.period_distinct_senders)
                for e in entries
            ]

    def test_repeat_call_identical(self, api, auth):
        params = {"from": FULL_FROM, "to": FULL_TO, "kind": "image", "limit": 30}
        first = self._get(api, auth, **params)
        second = self._get(api, auth, **params)
        assert first.content == second.content

    def test_limit_is_prefix(self, api, auth):
        base = {"from": FULL_FROM, "to": FULL_TO, "kind": "text"}
        full = self._get(api, auth, **base, limit=50).json()
        head = self._get(api, auth, **base, limit=10).json()
        assert head == full[:10]

    def test_default_limit_is_50(self, api, auth):
        base = {"from": FULL_FROM, "to": FULL_TO, "kind": "text"}
        assert self._get(api, auth, **base).json() == self._get(api, auth, **base, limit=50).json()

    def test_text_representative(self, api, auth):
        body = self._get(api, auth, **{"from": FULL_FROM, "to": FULL_TO,
                                       "kind": "text", "limit": 5}).json()
        assert body, "fixture should have ranked text content"
        rep = body[0]["representative"]
        assert rep["kind"] == "text"
        assert isinstance(rep["text"], str) and rep["text"]
        assert "checksum" not in rep and "media_url" not in rep

    def test_image_representative_resolves(self, api, auth):
        body = self._get(api, auth, **{"from": FULL_FROM, "to": FULL_TO,
                                       "kind": "image", "limit": 5}).json()
        assert body
        rep = body[0]["representative"]
        assert rep["kind"] == "image"
        assert rep["media_url"] == f"/api/media/{rep['checksum']}"
        media = api.client.get(rep["media_url"], headers=auth)
        assert media.status_code == 200
        assert media.headers["content-type"] == "image/jpeg"

    @pytest.mark.parametrize(
        "params",
        [
            {},
            {"from": FULL_FROM},
            {"from": "yesterday", "to": FULL_TO, "kind": "image"},
            {"from": FULL_TO, "to": FULL_FROM, "kind": "image"},
            {"from": FULL_FROM, "to": FULL_TO},
            {"from": FULL_FROM, "to": FULL_TO, "kind": "gif"},
            {"from": FULL_FROM, "to": FULL_TO, "kind": "image", "limit": "0"},
            {"from": FULL_FROM, "to": FULL_TO, "kind": "image", "limit": "201"},
            {"from": FULL_FROM, "to": FULL_TO, "kind": "image", "limit": "ten"},
        ],
    )
    def test_bad_params(self, api, auth, params):
        response = self._get(api, auth, **params)
        assert response.status_code == 400
        body = response.json()
        assert set(body) == {"code", "message"}
        assert body["code"] == "bad_request"


class TestContent:
    def _some_cluster(self, api, kind):
        return next(c for c in api.dataset.clusters
                    if c.kind == kind and c.share_count >= 2)

    def test_matches_direct_details(self, api, auth):
        from chatmonitor.rank_stats import content_details

        cluster = self._some_cluster(api, "image")
        response = api.client.get(f"/api/content/{cluster.cluster_id}", headers=auth)
        assert response.status_code == 200
        body = response.json()
        details = content_details(
            cluster.cluster_id,
            api.dataset.clusters_by_id(),
            api.dataset.messages,
            api.dataset.registry,
            media_url_base=api.config.public_base_url,
        )
        assert body["cluster_id"] == details.cluster_id
        assert body["kind"] == "image"
        assert body["period_share_count"] == details.period_share_count
        assert body["period_distinct_groups"] == details.period_distinct_groups
        assert body["period_distinct_senders"] == details.period_distinct_senders
        assert body["group_titles"] == list(details.group_titles)
        assert body["reverse_search_url"] == details.reverse_search_url
        assert body["reverse_search_url"].startswith("https://lens.google.com/uploadbyurl?url=")

    def test_text_cluster_has_no_search_url(self, api, auth):
        cluster = self._some_cluster(api, "text")
        body = api.client.get(f"/api/content/{cluster.cluster_id}", headers=auth).json()
        assert "reverse_search_url" not in body
        assert body["representative"]["kind"] == "text"

    def test_period_filter(self, api, auth):
        cluster = self._some_cluster(api, "text")
        empty = api.client.get(
            f"/api/content/{cluster.cluster_id}",
            params={"from": "2019-01-01", "to": "2019-01-02"},
            headers=auth,
        ).json()
        assert empty["period_share_count"] == 0
        assert empty["group_titles"] == []

    def test_bad_period(self, api, auth):
        cluster = api.dataset.clusters[0]
        response = api.client.get(
            f"/api/content/{cluster.cluster_id}",
            params={"from": "2021-03-07", "to": "2021-02-22"},
            headers=auth,
        )
        assert response.status_code == 400

    def test_unknown_cluster(self, api, auth):
        response = api.client.get("/api/content/image-feedfeed", headers=auth)
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"


class TestMedia:
    def test_jpeg_bytes_round_trip(self, api, auth):
        cluster = next(c for c in api.dataset.clusters if c.kind == "image")
        checksum = cluster.representative_blob.checksum
        response = api.client.get(f"/api/media/{checksum}", headers=auth)
        assert response.status_code == 200
        assert response.content == api.dataset.blobs.get(checksum)
        assert response.headers["content-type"] == "image/jpeg"

    def test_immutable_cache_header(self, api, auth):
        cluster = next(c for c in api.dataset.clusters if c.kind == "image")
        checksum = cluster.representative_blob.checksum
        response = api.client.get(f"/api/media/{checksum}", headers=auth)
        assert response.headers["cache-control"] == "public, max-age=31536000, immutable"

    def test_opaque_payload_served_as_octet_stream(self, api, auth):
        cluster = next(c for c in api.dataset.clusters if c.kind == "video")
        checksum = cluster.representative_blob.checksum
        response = api.client.get(f"/api/media/{checksum}", headers=auth)
        assert response.status_code == 200
        assert response.headers["content-type"] == "application/octet-stream"

    def test_unknown_checksum(self, api, auth):
        response = api.client.get("/api/media/" + "f" * 32, headers=auth)
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"


class TestStats:
    def test_members_cdf_matches_direct(self, api, auth):
        response = api.client.get("/api/stats/members_cdf", headers=auth)
        assert response.status_code == 200
        expected = [
            {"member_count": m, "cumulative_fraction": f}
            for m, f in members_cdf(api.dataset.registry)
        ]
        assert response.json() == expected
        assert response.json()[-1]["cumulative_fraction"] == 1.0

    def test_members_cdf_kind_filter(self, api, auth):
        groups = api.client.get(
            "/api/stats/members_cdf", params={"kind": "group"}, headers=auth
        ).json()
        expected = [
            {"member_count": m, "cumulative_fraction": f}
            for m, f in members_cdf(api.dataset.registry, kind="group")
        ]
        assert groups == expected

    def test_members_cdf_bad_kind(self, api, auth):
        response = api.client.get(
            "/api/stats/members_cdf", params={"kind": "supergroup"}, headers=auth
        )
        assert response.status_code == 400

    def test_weekly_volume_matches_direct(self, api, auth):
        response = api.client.get("/api/stats/weekly_volume", headers=auth)
        assert response.status_code == 200
        expected = [
            {"week": w, "count": n}
            for w, n in weekly_volume(api.dataset.messages.values())
        ]
        assert response.json() == expected
        assert sum(p["count"] for p in response.json()) == len(api.dataset.messages)


class TestCors:
    def test_configured_origin_allowed(self, api, auth):
        response = api.client.get(
            "/api/stats/weekly_volume",
            headers={**auth, "Origin": api.config.cors_origin},
        )
        assert response.headers.get("access-control-allow-origin") == api.config.cors_origin

    def test_preflight(self, api):
        response = api.client.options(
            "/api/top",
            headers={
                "Origin": api.config.cors_origin,
                "Access-Control-Request-Method": "GET",
                "Access-Control-Request-Headers": "Authorization",
            },
        )
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == api.config.cors_origin


class TestPrivacy:
    def _all_response_text(self, api, auth) -> str:
        chunks = []
        for kind in ALL_KINDS:
            chunks.append(
                api.client.get(
                    "/api/top",
                    params={"from": FULL_FROM, "to": FULL_TO, "kind": kind, "limit": 200},
                    headers=auth,
                ).text
            )
        for cluster in api.dataset.clusters:
            chunks.append(
                api.client.get(f"/api/content/{cluster.cluster_id}", headers=auth).text
            )
        chunks.append(api.client.get("/api/stats/members_cdf", headers=auth).text)
        chunks.append(api.client.get("/api/stats/weekly_volume", headers=auth).text)
        return "\n".join(chunks)

    def test_no_sender_identities_leave_the_api(self, api, auth):
        text = self._all_response_text(api, auth)
        for raw_id in api.manifest["senders"]:
            assert raw_id not in text
        pseudonyms = {m.sender for m in api.dataset.messages.values()}
        for pseudonym in pseudonyms:
            assert pseudonym not in text
