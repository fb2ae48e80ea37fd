/**
 * Voter view: show the current signature code, advance it (cancelling any
 * outstanding ballot that carries the old code), and rotate a disclosed
 * secret. All state is derived from API responses; nothing is cached.
 */

import { ApiClient, ApiError, CodeResponse } from "./api.js";

export interface VoterViewModel {
  voterId: string;
  electionId: string;
  index: number;
  numeric20: string;
  /** One visual token per word so transcription errors stay word-local. */
  wordTokens: string[];
  words6: string;
  error: string | null;
  /** Set only immediately after a rotation; shown once, never stored. */
  oneTimeSecret: string | null;
}

export const ADVANCE_WARNING =
  "Advancing issues a new code and permanently cancels any ballot already " +
  "in the mail that carries the current code. Continue?";

function fromResponse(code: CodeResponse): VoterViewModel {
  return {
    voterId: code.voter_id,
    electionId: code.election_id,
    index: code.index,
    numeric20: code.numeric20,
    wordTokens: code.words6.split(" "),
    words6: code.words6,
    error: null,
    oneTimeSecret: null,
  };
}

function withError(model: VoterViewModel, message: string): VoterViewModel {
  return { ...model, error: message, oneTimeSecret: null };
}

export class VoterController {
  constructor(
    private readonly api: ApiClient,
    private readonly voterId: string,
    private readonly electionId: string,
    /** Confirmation hook (window.confirm in the browser, a stub in tests). */
    private readonly confirm: (message: string) => boolean,
  ) {}

  async load(): Promise<VoterViewModel> {
    return fromResponse(await this.api.currentCode(this.voterId, this.electionId));
  }

  /** Advance after explicit confirmation; returns the refreshed view. */
  async advance(current: VoterViewModel): Promise<VoterViewModel> {
    if (!this.confirm(ADVANCE_WARNING)) return current;
    try {
      return fromResponse(await this.api.advance(this.voterId, this.electionId));
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        return withError(current, `Cannot advance: ${e.detail}`);
      }
      throw e;
    }
  }

  /** Rotate the secret; the returned model carries the one-time disclosure. */
  async rotate(): Promise<VoterViewModel> {
    const rotation = await this.api.rotate(this.voterId);
    const refreshed = await this.load();
    return { ...refreshed, oneTimeSecret: rotation.secret };
  }
}
