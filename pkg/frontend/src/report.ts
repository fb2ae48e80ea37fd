/**
 * Parsing and presentation helpers for the service's plain-text batch report.
 *
 * The report format is one tab-separated row per envelope followed by a
 * summary block; the portal parses it for display but never recomputes a
 * disposition itself.
 */

export interface ReportRow {
  envelopeId: string;
  status: string;
  matchedIndex: number | null;
  corrections: number;
  reason: string;
}

export interface ParsedReport {
  rows: ReportRow[];
  summary: Record<string, number>;
  total: number;
}

export const REPORT_HEADER = "sigcode-report v1";

export function parseReport(text: string): ParsedReport {
  const lines = text.split("\n");
  if (lines[0] !== REPORT_HEADER) {
    throw new Error(`unrecognized report header: ${lines[0] ?? "(empty)"}`);
  }
  const rows: ReportRow[] = [];
  const summary: Record<string, number> = {};
  let total = 0;
  let section: "rows" | "summary" = "rows";
  for (const line of lines.slice(2)) {
    if (line === "") continue;
    if (line === "summary") {
      section = "summary";
      continue;
    }
    const fields = line.split("\t");
    if (section === "rows") {
      if (fields.length !== 5) throw new Error(`bad report row: ${line}`);
      rows.push({
        envelopeId: fields[0],
        status: fields[1],
        matchedIndex: fields[2] === "" ? null : Number(fields[2]),
        corrections: Number(fields[3]),
        reason: fields[4],
      });
    } else {
      if (fields.length !== 2) throw new Error(`bad summary row: ${line}`);
      if (fields[0] === "total") total = Number(fields[1]);
      else summary[fields[0]] = Number(fields[1]);
    }
  }
  return { rows, summary, total };
}

export type SortKey = "envelopeId" | "status" | "matchedIndex";

/** Stable sort for the disposition table; never mutates the input. */
export function sortRows(
  rows: ReportRow[],
  key: SortKey,
  direction: "asc" | "desc" = "asc",
): ReportRow[] {
  const sign = direction === "asc" ? 1 : -1;
  return rows
    .map((row, position) => ({ row, position }))
    .sort((a, b) => {
      const av = a.row[key];
      const bv = b.row[key];
      let cmp: number;
      if (av === null) cmp = bv === null ? 0 : -1;
      else if (bv === null) cmp = 1;
      else cmp = av < bv ? -1 : av > bv ? 1 : 0;
      return sign * cmp || a.position - b.position;
    })
    .map((entry) => entry.row);
}

export interface EnvelopeCsvRow {
  envelopeId: string;
  voterId: string;
  electionId: string;
  codeText: string;
  receivedAt: string;
}

const CSV_HEADER = "envelope_id,voter_id,election_id,code_text,received_at";

/**
 * Parse the uploaded envelope CSV just enough to join voter ids back onto
 * report rows. The authoritative parse happens server-side; this mirror only
 * needs the simple comma-separated shape the registrar emits.
 */
export function parseEnvelopeCsv(text: string): EnvelopeCsvRow[] {
  const lines = text.split("\n").filter((line) => line !== "");
  if (lines[0] !== CSV_HEADER) {
    throw new Error(`expected header "${CSV_HEADER}", got "${lines[0] ?? ""}"`);
  }
  return lines.slice(1).map((line, i) => {
    const fields = line.split(",");
    if (fields.length !== 5) {
      throw new Error(`line ${i + 2}: expected 5 fields, got ${fields.length}`);
    }
    return {
      envelopeId: fields[0],
      voterId: fields[1],
      electionId: fields[2],
      codeText: fields[3],
      receivedAt: fields[4],
    };
  });
}

/**
 * Build the downloadable notification list: one CSV row per envelope that
 * will not be counted, with the voter id joined from the uploaded batch.
 */
export function notificationCsv(report: ParsedReport, envelopes: EnvelopeCsvRow[]): string {
  const voterByEnvelope = new Map(envelopes.map((e) => [e.envelopeId, e.voterId]));
  const lines = ["voter_id,envelope_id,status,reason"];
  for (const row of report.rows) {
    if (row.status === "VALID") continue;
    const voterId = voterByEnvelope.get(row.envelopeId) ?? "";
    const reason = row.reason.includes(",") ? `"${row.reason.replace(/"/g, '""')}"` : row.reason;
    lines.push(`${voterId},${row.envelopeId},${row.status},${reason}`);
  }
  return lines.join("\n") + "\n";
}
