/**
 * Official view: single-envelope check and CSV batch upload with a sortable
 * disposition table, summary counts and a notification-list download.
 */

import { ApiClient, ApiError, CheckRequest, CheckResponse } from "./api.js";
import {
  EnvelopeCsvRow,
  ParsedReport,
  ReportRow,
  SortKey,
  notificationCsv,
  parseEnvelopeCsv,
  parseReport,
  sortRows,
} from "./report.js";

export interface CheckViewModel {
  status: string;
  matchedIndex: number | null;
  corrections: number;
  reason: string;
}

export interface BatchViewModel {
  batchId: string;
  reportText: string;
  rows: ReportRow[];
  summary: Record<string, number>;
  total: number;
  sortKey: SortKey;
  sortDirection: "asc" | "desc";
  /** CSV offered as the notification-list download. */
  notificationCsv: string;
  error: string | null;
}

export class OfficialController {
  constructor(private readonly api: ApiClient) {}

  async check(request: CheckRequest): Promise<CheckViewModel> {
    const response: CheckResponse = await this.api.checkEnvelope(request);
    return {
      status: response.status,
      matchedIndex: response.matched_index,
      corrections: response.corrections,
      reason: response.reason,
    };
  }

  async uploadBatch(csvText: string): Promise<BatchViewModel> {
    let envelopes: EnvelopeCsvRow[];
    try {
      envelopes = parseEnvelopeCsv(csvText);
    } catch (e) {
      return emptyBatch(`CSV error: ${(e as Error).message}`);
    }
    let batchId: string;
    let reportText: string;
    try {
      const response = await this.api.validateBatch(csvText);
      batchId = response.batchId;
      reportText = response.report;
    } catch (e) {
      if (e instanceof ApiError && e.status === 400) {
        return emptyBatch(`Batch rejected: ${e.detail}`);
      }
      throw e;
    }
    const report: ParsedReport = parseReport(reportText);
    return {
      batchId,
      reportText,
      rows: report.rows,
      summary: report.summary,
      total: report.total,
      sortKey: "envelopeId",
      sortDirection: "asc",
      notificationCsv: notificationCsv(report, envelopes),
      error: null,
    };
  }

  /** Re-sort the table; clicking the active column flips the direction. */
  sortBy(model: BatchViewModel, key: SortKey): BatchViewModel {
    const direction =
      model.sortKey === key && model.sortDirection === "asc" ? "desc" : "asc";
    return {
      ...model,
      rows: sortRows(model.rows, key, direction),
      sortKey: key,
      sortDirection: direction,
    };
  }
}

function emptyBatch(error: string): BatchViewModel {
  return {
    batchId: "",
    reportText: "",
    rows: [],
    summary: {},
    total: 0,
    sortKey: "envelopeId",
    sortDirection: "asc",
    notificationCsv: "",
    error,
  };
}
