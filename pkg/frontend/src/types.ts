// Wire types mirroring the workbench service JSON exactly.

export const COMPONENT_NAMES = [
  'originality',
  'color',
  'texture',
  'composition',
  'content',
] as const;

export type ComponentName = (typeof COMPONENT_NAMES)[number];

export type ComponentScores = Record<ComponentName, number>;

export interface RatingJson extends ComponentScores {
  rater_id: string;
  total: number;
  timestamp: string;
}

export interface PaintingJson {
  id: string;
  source: 'child' | 'artist';
  width: number;
  height: number;
  split: string;
  ratings: RatingJson[];
  consensus_total: number | null;
  consensus_components: ComponentScores | null;
}

export interface PaintingPage {
  page: number;
  page_size: number;
  total: number;
  items: PaintingJson[];
}

export interface AgreementSnapshotJson {
  n_common: number;
  icc: number | null;
  rater_ids: string[];
  disagreements: { painting_id: string; delta_total: number }[];
}

export interface SubmitResponse {
  ok: boolean;
  painting_id: string;
  rater_id: string;
  total: number;
  agreement: AgreementSnapshotJson;
}

export interface CompareResponse {
  painting_id: string;
  consensus: ({ total: number } & ComponentScores) | null;
  model: ComponentScores & { total: number; clamped_total: number };
  deltas: ComponentScores | null;
}
