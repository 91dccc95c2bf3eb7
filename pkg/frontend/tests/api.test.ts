import { describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api";

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(responder: (url: string, init?: RequestInit) => Response) {
  const calls: Call[] = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    return responder(url, init);
  }) as typeof fetch;
  return { impl, calls };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const BASE = "http://api.test:8008";

async function loggedInClient(responder: (url: string, init?: RequestInit) => Response) {
  const { impl, calls } = fakeFetch((url, init) => {
    if (url.endsWith("/api/login")) {
      return jsonResponse({ token: "t".repeat(64), expires_in_seconds: 3600 });
    }
    return responder(url, init);
  });
  const client = new ApiClient(BASE, impl);
  await client.login("analyst", "pw");
  return { client, calls };
}

describe("login", () => {
  test("posts credentials and stores the token", async () => {
    const { impl, calls } = fakeFetch(() =>
      jsonResponse({ token: "abc123", expires_in_seconds: 60 }),
    );
    const client = new ApiClient(BASE, impl);
    const body = await client.login("analyst", "pw");
    expect(body.token).toBe("abc123");
    expect(client.hasSession()).toBe(true);
    expect(calls[0]?.url).toBe(BASE + "/api/login");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      username: "analyst",
      password: "pw",
    });
  });

  test("bad credentials surface the API error body", async () => {
    const { impl } = fakeFetch(() =>
      jsonResponse({ code: "bad_credentials", message: "unknown username or wrong password" }, 401),
    );
    const client = new ApiClient(BASE, impl);
    await expect(client.login("analyst", "wrong")).rejects.toMatchObject({
      status: 401,
      code: "bad_credentials",
    });
    expect(client.hasSession()).toBe(false);
  });
});

describe("session rule", () => {
  test("no request leaves the client without a token", async () => {
    const { impl, calls } = fakeFetch(() => jsonResponse([]));
    const client = new ApiClient(BASE, impl);
    await expect(
      client.top({ from: "2021-03-01", to: "2021-03-07" }, "image", 10),
    ).rejects.toMatchObject({ code: "no_session" });
    await expect(client.weeklyVolume()).rejects.toBeInstanceOf(ApiError);
    expect(calls).toHaveLength(0);
  });

  test("a 401 clears the session", async () => {
    const { client } = await loggedInClient(() =>
      jsonResponse({ code: "token_expired", message: "token expired" }, 401),
    );
    await expect(client.weeklyVolume()).rejects.toMatchObject({ code: "token_expired" });
    expect(client.hasSession()).toBe(false);
  });
});

describe("query building", () => {
  test("top sends period, kind, limit and the bearer header", async () => {
    const { client, calls } = await loggedInClient(() => jsonResponse([]));
    await client.top({ from: "2021-03-01", to: "2021-03-07" }, "image", 25);
    const call = calls.at(-1)!;
    const url = new URL(call.url);
    expect(url.pathname).toBe("/api/top");
    expect(Object.fromEntries(url.searchParams)).toEqual({
      from: "2021-03-01",
      to: "2021-03-07",
      kind: "image",
      limit: "25",
    });
    expect((call.init?.headers as Record<string, string>).Authorization).toBe(
      "Bearer " + "t".repeat(64),
    );
  });

  test("content path encodes the cluster id and optional period", async () => {
    const { client, calls } = await loggedInClient(() =>
      jsonResponse({
        cluster_id: "x",
        kind: "text",
        period_share_count: 0,
        period_distinct_groups: 0,
        period_distinct_senders: 0,
        group_titles: [],
        representative: { kind: "text", text: "" },
      }),
    );
    await client.content("text-00ff");
    expect(new URL(calls.at(-1)!.url).pathname).toBe("/api/content/text-00ff");
    await client.content("text-00ff", { from: "2021-03-01", to: "2021-03-02" });
    const url = new URL(calls.at(-1)!.url);
    expect(url.searchParams.get("from")).toBe("2021-03-01");
    expect(url.searchParams.get("to")).toBe("2021-03-02");
  });

  test("membersCdf kind filter is optional", async () => {
    const { client, calls } = await loggedInClient(() => jsonResponse([]));
    await client.membersCdf();
    expect(calls.at(-1)!.url).toBe(BASE + "/api/stats/members_cdf");
    await client.membersCdf("group");
    expect(calls.at(-1)!.url).toBe(BASE + "/api/stats/members_cdf?kind=group");
  });

  test("mediaUrl joins the base URL", async () => {
    const { client } = await loggedInClient(() => jsonResponse([]));
    expect(client.mediaUrl("/api/media/00ff")).toBe(BASE + "/api/media/00ff");
  });
});

describe("error decoding", () => {
  test("non-JSON error body falls back to status text", async () => {
    const { client } = await loggedInClient(
      () => new Response("boom", { status: 500, statusText: "Internal Server Error" }),
    );
    await expect(client.weeklyVolume()).rejects.toMatchObject({
      status: 500,
      code: "error",
    });
  });

  test("structured 400 carries the server code", async () => {
    const { client } = await loggedInClient(() =>
      jsonResponse({ code: "bad_request", message: "kind must be one of ..." }, 400),
    );
    await expect(
      client.top({ from: "2021-03-01", to: "2021-03-07" }, "image", 25),
    ).rejects.toMatchObject({ status: 400, code: "bad_request" });
    // a 400 is not an auth failure; the session survives
    expect(client.hasSession()).toBe(true);
  });
});
