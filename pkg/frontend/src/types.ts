/**
 * Wire types for the node's /v1 JSON interface.
 *
 * These mirror what the node actually serializes — no client-only fields and
 * no renaming — so a response can be fed straight back into the hash and
 * proof checks without translation.
 */

import type { Canonical } from "./canon.js";
import type { ProofWire } from "./merkle.js";

export interface EventWire {
  author: string;
  event_id: string;
  kind: string;
  payload: Record<string, Canonical>;
  timestamp: number;
}

export interface HeaderWire {
  difficulty: number;
  height: number;
  merkle_root: string;
  nonce: number;
  prev_hash: string;
  timestamp: number;
}

export interface BlockWire {
  events: EventWire[];
  header: HeaderWire;
}

export interface ChainTipWire {
  height: number;
  tip_hash: string;
  total_work: number;
}

export interface DefinitionWire {
  criteria: string;
  definition_id: string;
  description: string;
  grade_levels: string[];
  icon: string;
  issuer: string;
  name: string;
}

export interface TokenWire {
  certified_at: number;
  definition_id: string;
  grade: string;
  holder: string;
  issuer: string;
  minted_at: number;
  official_description: string;
  status: string;
  token_id: string;
}

export interface InclusionProofWire {
  event: EventWire;
  height: number;
  proof: ProofWire;
  root: string;
  verified: boolean;
}

export interface VerifyReportWire {
  certified: boolean;
  exists: boolean;
  token_id: string;
  definition?: DefinitionWire;
  holder?: string;
  inclusion_proofs?: InclusionProofWire[];
  issuer?: string;
  proofs_ok?: boolean;
  status?: string;
  token?: TokenWire;
}

export interface PublicKeyWire {
  exponent: number;
  modulus: string;
}

export interface TallyWire {
  approvals: number;
  counts: Record<string, number>;
  passed: boolean;
  quorum: number;
  round_id: string;
  threshold_den: number;
  threshold_num: number;
  total_cast: number;
}

export interface RoundWire {
  counts: Record<string, number>;
  open: boolean;
  options: string[];
  public_key: PublicKeyWire;
  quorum: number;
  round_id: string;
  subject_hash: string;
  threshold_den: number;
  threshold_num: number;
  total_cast: number;
  tally?: TallyWire | null;
}

export interface BallotWire {
  round_id: string;
  signed_blind: string;
  voter: string;
}

export interface CastReceiptWire {
  block_height: number;
  option: string;
  round_id: string;
  serial: string;
}

export interface ReviewRecordWire {
  compliance_ok: boolean;
  design_ok: boolean;
  platform_ok: boolean;
  security_ok: boolean;
  notes: Record<string, string>;
  reviewer: string;
  reviewed_at: number;
}

export interface ApplicationWire {
  application_id: string;
  awarding_rules: string;
  definition_id: string;
  platform: string;
  rejection_reason: string;
  review: ReviewRecordWire | null;
  reviewer: string;
  revision: number;
  sample_awards: Array<{ holder: string; proof_ref: string; token_id: string }>;
  state: string;
  voting_data: string;
}
