import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  notificationCsv,
  parseEnvelopeCsv,
  parseReport,
  sortRows,
} from "../src/report.js";

const fixturesDir = new URL("./fixtures/", import.meta.url);
const honestBatch: { csv: string; report: string } = JSON.parse(
  readFileSync(new URL("honest_batch.json", fixturesDir), "utf-8"),
);

const MIXED_REPORT = [
  "sigcode-report v1",
  "envelope_id\tstatus\tmatched_index\tcorrections\treason",
  "E002\tVALID\t0\t0\tmatched chain index 0",
  "E000\tEXPIRED\t1\t0\tcode at index 1 was superseded, chain is at index 2",
  "E001\tMALFORMED\t\t0\tchecksum mismatch",
  "",
  "summary",
  "VALID\t1",
  "EXPIRED\t1",
  "STALE_SECRET\t0",
  "INVALID\t0",
  "MALFORMED\t1",
  "UNKNOWN_VOTER\t0",
  "total\t3",
  "",
].join("\n");

describe("report parsing", () => {
  it("parses the recorded honest report exactly", () => {
    const report = parseReport(honestBatch.report);
    expect(report.total).toBe(100);
    expect(report.summary["VALID"]).toBe(100);
    expect(report.rows).toHaveLength(100);
    expect(report.rows[0].matchedIndex).toBe(0);
  });

  it("parses mixed dispositions including empty matched_index", () => {
    const report = parseReport(MIXED_REPORT);
    expect(report.rows.map((row) => row.status)).toEqual([
      "VALID",
      "EXPIRED",
      "MALFORMED",
    ]);
    expect(report.rows[2].matchedIndex).toBeNull();
    expect(report.summary["MALFORMED"]).toBe(1);
    expect(report.total).toBe(3);
  });

  it("rejects an unrecognized header", () => {
    expect(() => parseReport("something else\n")).toThrow(/unrecognized report header/);
  });
});

describe("sorting", () => {
  it("sorts by envelope id in both directions without mutating input", () => {
    const { rows } = parseReport(MIXED_REPORT);
    const asc = sortRows(rows, "envelopeId");
    expect(asc.map((row) => row.envelopeId)).toEqual(["E000", "E001", "E002"]);
    const desc = sortRows(rows, "envelopeId", "desc");
    expect(desc.map((row) => row.envelopeId)).toEqual(["E002", "E001", "E000"]);
    expect(rows.map((row) => row.envelopeId)).toEqual(["E002", "E000", "E001"]);
  });

  it("places null matched_index first ascending and keeps ties stable", () => {
    const { rows } = parseReport(MIXED_REPORT);
    const byIndex = sortRows(rows, "matchedIndex");
    expect(byIndex.map((row) => row.envelopeId)).toEqual(["E001", "E002", "E000"]);
  });
});

describe("envelope CSV and notification list", () => {
  it("round-trips the recorded batch CSV", () => {
    const envelopes = parseEnvelopeCsv(honestBatch.csv);
    expect(envelopes).toHaveLength(100);
    expect(envelopes[0].envelopeId).toBe("E000");
    expect(envelopes[0].voterId).toBe("V000001");
  });

  it("joins voter ids onto every non-VALID row", () => {
    const report = parseReport(MIXED_REPORT);
    const envelopes = [
      { envelopeId: "E000", voterId: "V000007", electionId: "GEN-2026", codeText: "x", receivedAt: "t" },
      { envelopeId: "E001", voterId: "V000008", electionId: "GEN-2026", codeText: "x", receivedAt: "t" },
      { envelopeId: "E002", voterId: "V000009", electionId: "GEN-2026", codeText: "x", receivedAt: "t" },
    ];
    const csv = notificationCsv(report, envelopes);
    const lines = csv.trimEnd().split("\n");
    expect(lines[0]).toBe("voter_id,envelope_id,status,reason");
    expect(lines).toHaveLength(3); // header + the two uncounted envelopes
    expect(lines[1]).toContain("V000007,E000,EXPIRED");
    expect(lines[1]).toContain('"'); // reason contains a comma, so it is quoted
    expect(lines[2]).toBe("V000008,E001,MALFORMED,checksum mismatch");
  });
});
