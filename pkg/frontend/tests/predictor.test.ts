import { afterEach, describe, expect, it, vi } from "vitest";

import { Api, Features, PredictionDoc } from "../src/api.js";
import { wire } from "../src/format.js";
import { PredictController, PredictState } from "../src/predictor.js";

const COLUMNS = ["age", "gender", "braden_scale", "hester_davis"];

interface Call {
  url: string;
  body: unknown;
  signal: AbortSignal | undefined;
}

function recordingFetch(bodies: string[], status = 200) {
  const calls: Call[] = [];
  let served = 0;
  const fetchFn = (url: string, init?: RequestInit) => {
    calls.push({
      url,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
      signal: init?.signal ?? undefined,
    });
    const raw = bodies[Math.min(served, bodies.length - 1)];
    served += 1;
    return Promise.resolve(
      new Response(raw, { status, headers: { "content-type": "application/json" } }),
    );
  };
  return { calls, fetchFn };
}

function harness(bodies: string[], status = 200) {
  const { calls, fetchFn } = recordingFetch(bodies, status);
  const states: PredictState[] = [];
  const controller = new PredictController(
    new Api("http://svc", fetchFn),
    COLUMNS,
    (s) => states.push(s),
    { debounceMs: 0 },
  );
  return { calls, states, controller };
}

const tick = (ms = 15) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** Raw wire text exactly as the service would serialize it, keyed by
 * the committed form state that should produce it. Values avoid
 * nothing: ugly shortest-repr decimals are the point. */
const SCRIPTED: Array<{ features: Features; raw: string }> = [
  {
    features: {},
    raw: '{"disposition":"Home or Self Care","probabilities":{"Home or Self Care":0.4520547945205479,"Rehab Facility":0.2876712328767123,"Skilled Nursing Facility":0.2602739726027397},"scores":null,"explanation":[{"predictor":null,"group":null,"class_counts":{"Home or Self Care":66,"Rehab Facility":42,"Skilled Nursing Facility":38}}],"recommendation":"none"}',
  },
  {
    features: { age: 81, gender: "Female", braden_scale: 11, hester_davis: 17 },
    raw: '{"disposition":"Skilled Nursing Facility","probabilities":{"Rehab Facility":0.16666666666666666,"Skilled Nursing Facility":0.8333333333333334},"scores":null,"explanation":[{"predictor":"braden_scale","group":["(9.0, 13.0]"],"class_counts":{"Rehab Facility":12,"Skilled Nursing Facility":55}},{"predictor":null,"group":null,"class_counts":{"Rehab Facility":3,"Skilled Nursing Facility":15}}],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { age: 81 },
    raw: '{"disposition":"Skilled Nursing Facility","probabilities":{"Rehab Facility":0.30000000000000004,"Skilled Nursing Facility":0.7},"scores":null,"explanation":[],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { age: 70, gender: "Male" },
    raw: '{"disposition":"Rehab Facility","probabilities":null,"scores":{"Rehab Facility":1.2345678901234567,"Skilled Nursing Facility":-1.2345678901234567},"explanation":null,"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { braden_scale: 12 },
    raw: '{"disposition":"Rehab Facility","probabilities":{"Rehab Facility":0.9090909090909091,"Skilled Nursing Facility":0.09090909090909094},"scores":null,"explanation":[{"predictor":"braden_scale","group":["braden_scale <= 13.5"],"class_counts":{"Rehab Facility":30,"Skilled Nursing Facility":3}}],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { hester_davis: 18 },
    raw: '{"disposition":"Skilled Nursing Facility","probabilities":{"Rehab Facility":0.5,"Skilled Nursing Facility":0.47},"scores":null,"explanation":[],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { age: 55, braden_scale: 20 },
    raw: '{"disposition":"Home or Self Care","probabilities":{"Expired":0.013698630136986301,"Home Health Care Service":0.1917808219178082,"Home or Self Care":0.6164383561643836,"Rehab Facility":0.0958904109589041,"Skilled Nursing Facility":0.0821917808219178},"scores":null,"explanation":[],"recommendation":"none"}',
  },
  {
    features: { gender: "Female" },
    raw: '{"disposition":"Skilled Nursing Facility","probabilities":{"Rehab Facility":0.3333333333333333,"Skilled Nursing Facility":0.6666666666666666},"scores":null,"explanation":[],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { age: 97, hester_davis: 3 },
    raw: '{"disposition":"Rehab Facility","probabilities":{"Rehab Facility":0.876543211,"Skilled Nursing Facility":0.123456789},"scores":null,"explanation":[],"recommendation":"initiate_prior_authorization"}',
  },
  {
    features: { age: 16, gender: "Male", braden_scale: 1 },
    raw: '{"disposition":"Skilled Nursing Facility","probabilities":{"Rehab Facility":0.0001220703125,"Skilled Nursing Facility":0.9998779296875},"scores":null,"explanation":[],"recommendation":"initiate_prior_authorization"}',
  },
];

describe("scripted form states", () => {
  it("renders every response byte-for-byte as served", async () => {
    for (const { features, raw } of SCRIPTED) {
      const { calls, states, controller } = harness([raw]);
      controller.submit(features);
      await tick();

      expect(calls).toHaveLength(1);
      expect(calls[0].url).toBe("http://svc/api/v1/predict");
      expect(calls[0].body).toEqual({ features });

      const state = states[states.length - 1];
      expect(state.phase).toBe("ready");
      expect(state.stale).toBe(false);
      const doc = state.doc as PredictionDoc;
      const expected = JSON.parse(raw) as PredictionDoc;
      expect(doc).toEqual(expected);

      // what the panes display must be the exact wire text
      for (const table of [doc.probabilities, doc.scores]) {
        if (table === null) continue;
        for (const [label, value] of Object.entries(table)) {
          expect(raw).toContain(`"${label}":${wire(value)}`);
        }
      }
      expect(raw).toContain(`"disposition":"${doc.disposition}"`);
    }
  });

  it("covers both recommendation outcomes", () => {
    const outcomes = new Set(
      SCRIPTED.map((s) => (JSON.parse(s.raw) as PredictionDoc).recommendation),
    );
    expect(outcomes).toEqual(new Set(["none", "initiate_prior_authorization"]));
  });
});

describe("blank form", () => {
  it("posts an empty feature map and shows the model prior", async () => {
    const prior = SCRIPTED[0];
    const { calls, states, controller } = harness([prior.raw]);
    controller.submit({});
    await tick();

    expect(calls[0].body).toEqual({ features: {} });
    const doc = states[states.length - 1].doc as PredictionDoc;
    expect(doc.disposition).toBe("Home or Self Care");
    expect(doc.probabilities).toEqual(
      (JSON.parse(prior.raw) as PredictionDoc).probabilities,
    );
  });
});

describe("service failures", () => {
  it("flags unreachable without crashing and greys the last results", async () => {
    const good = SCRIPTED[1];
    const { calls, fetchFn } = recordingFetch([good.raw]);
    let fail = false;
    const flaky = (url: string, init?: RequestInit) => {
      if (fail) return Promise.reject(new TypeError("fetch failed"));
      return fetchFn(url, init);
    };
    const states: PredictState[] = [];
    const controller = new PredictController(
      new Api("http://svc", flaky), COLUMNS, (s) => states.push(s), { debounceMs: 0 },
    );

    controller.submit(good.features);
    await tick();
    expect(states[states.length - 1].phase).toBe("ready");

    fail = true;
    controller.submit({ age: 50 });
    await tick();

    const state = states[states.length - 1];
    expect(state.phase).toBe("unreachable");
    expect(state.stale).toBe(true);
    expect((state.doc as PredictionDoc).disposition).toBe("Skilled Nursing Facility");
    expect(calls).toHaveLength(1); // the failed call never reached the recorder
  });

  it("maps a 422 detail onto the offending field and keeps the last document", async () => {
    const good = SCRIPTED[2];
    const bad = '{"error":"unprocessable","detail":"column \'age\': \'elderly\' is not a number"}';
    const { states, controller } = (() => {
      const goodFetch = recordingFetch([good.raw]);
      const badFetch = recordingFetch([bad], 422);
      let first = true;
      const fetchFn = (url: string, init?: RequestInit) => {
        const target = first ? goodFetch : badFetch;
        first = false;
        return target.fetchFn(url, init);
      };
      const states: PredictState[] = [];
      const controller = new PredictController(
        new Api("http://svc", fetchFn), COLUMNS, (s) => states.push(s), { debounceMs: 0 },
      );
      return { states, controller };
    })();

    controller.submit(good.features);
    await tick();
    controller.submit({ age: "elderly" });
    await tick();

    const state = states[states.length - 1];
    expect(state.phase).toBe("invalid");
    expect(state.fieldError).toEqual({
      column: "age",
      message: "column 'age': 'elderly' is not a number",
    });
    expect(state.stale).toBe(true);
    expect((state.doc as PredictionDoc).disposition).toBe("Skilled Nursing Facility");
  });
});

describe("request discipline", () => {
  afterEach(() => {
    vi.useRealTimers();
  });

  it("debounces bursts of committed changes into one request", async () => {
    vi.useFakeTimers();
    const { calls, fetchFn } = recordingFetch([SCRIPTED[2].raw]);
    const controller = new PredictController(
      new Api("http://svc", fetchFn), COLUMNS, () => {}, { debounceMs: 200 },
    );

    controller.submit({ age: 7 });
    await vi.advanceTimersByTimeAsync(50);
    controller.submit({ age: 78 });
    await vi.advanceTimersByTimeAsync(50);
    controller.submit({ age: 81 });
    await vi.advanceTimersByTimeAsync(400);

    expect(calls).toHaveLength(1);
    expect(calls[0].body).toEqual({ features: { age: 81 } });
  });

  it("aborts a superseded request so at most one is in flight", async () => {
    const calls: Call[] = [];
    let live = 0;
    let peak = 0;
    const fetchFn = (url: string, init?: RequestInit) => {
      calls.push({
        url,
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
        signal: init?.signal ?? undefined,
      });
      live += 1;
      peak = Math.max(peak, live);
      return new Promise<Response>((resolve, reject) => {
        const signal = init?.signal;
        if (calls.length === 1) {
          signal?.addEventListener("abort", () => {
            live -= 1;
            reject(new DOMException("Aborted", "AbortError"));
          });
          return; // first request hangs until it is aborted
        }
        live -= 1;
        resolve(new Response(SCRIPTED[3].raw, { status: 200 }));
      });
    };

    const states: PredictState[] = [];
    const controller = new PredictController(
      new Api("http://svc", fetchFn), COLUMNS, (s) => states.push(s), { debounceMs: 0 },
    );

    controller.submit({ age: 70 });
    await tick();
    controller.submit({ age: 70, gender: "Male" });
    await tick();

    expect(calls).toHaveLength(2);
    expect(calls[0].signal?.aborted).toBe(true);
    expect(peak).toBe(1);
    const state = states[states.length - 1];
    expect(state.phase).toBe("ready");
    expect((state.doc as PredictionDoc).disposition).toBe("Rehab Facility");
  });
});
