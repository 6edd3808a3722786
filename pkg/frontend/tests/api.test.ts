import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, ExplorerClient } from "../src/api.js";

function stubFetch(status: number, body: unknown): ReturnType<typeof vi.fn> {
  const stub = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => {
      if (body === undefined) throw new Error("no body");
      return body;
    },
  }));
  vi.stubGlobal("fetch", stub);
  return stub;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ExplorerClient", () => {
  it("builds the archive URL from the base and axes", async () => {
    const stub = stubFetch(200, { run_id: "r1", heatmap: [], cells: [] });
    const client = new ExplorerClient("http://service:9000");
    await client.archive("r1", [2, 0]);
    expect(stub.mock.calls[0][0]).toBe("http://service:9000/runs/r1/archive?ax=2,0");
  });

  it("posts step requests as JSON", async () => {
    const stub = stubFetch(200, { run_id: "r1", generation: 5, evaluations: 80, finished: false });
    const client = new ExplorerClient("");
    const result = await client.step("r1", 5);
    expect(result.generation).toBe(5);
    const [url, init] = stub.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/runs/r1/step");
    expect(init.method).toBe("POST");
    expect(init.headers).toEqual({ "content-type": "application/json" });
    expect(JSON.parse(init.body as string)).toEqual({ generations: 5 });
  });

  it("posts the favored cell and weight verbatim", async () => {
    const stub = stubFetch(200, { acknowledged: true, cell: [1, 2], weight: 3 });
    const client = new ExplorerClient("");
    const ack = await client.favorCell("r1", [1, 2], 3);
    expect(ack.acknowledged).toBe(true);
    const [, init] = stub.mock.calls[0] as unknown as [string, RequestInit];
    expect(JSON.parse(init.body as string)).toEqual({ cell: [1, 2], weight: 3 });
  });

  it("surfaces the server's error message verbatim", async () => {
    stubFetch(400, {
      error: { code: "unsupported", message: "GA does not use a steerable grid archive" },
    });
    const client = new ExplorerClient("");
    const failure = client.favorCell("r1", [0, 0], 3);
    await expect(failure).rejects.toThrow("GA does not use a steerable grid archive");
    await failure.catch((err: unknown) => {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("unsupported");
      expect((err as ApiError).status).toBe(400);
    });
  });

  it("falls back to the status code when the body is not an envelope", async () => {
    stubFetch(500, undefined);
    const client = new ExplorerClient("");
    await expect(client.listRuns()).rejects.toThrow("request failed with status 500");
  });
});
