/** Response shapes of the monitor API, mirrored field for field. */

export type MediaKind = "image" | "video" | "audio" | "text";

export interface LoginResponse {
  token: string;
  expires_in_seconds: number;
}

export interface TextRepresentative {
  kind: "text";
  text: string;
}

export interface MediaRepresentative {
  kind: Exclude<MediaKind, "text">;
  checksum: string;
  media_url: string;
}

export type Representative = TextRepresentative | MediaRepresentative;

export interface RankedEntry {
  rank: number;
  cluster_id: string;
  period_share_count: number;
  period_distinct_groups: number;
  period_distinct_senders: number;
  representative: Representative;
}

export interface ContentDetails {
  cluster_id: string;
  kind: MediaKind;
  period_share_count: number;
  period_distinct_groups: number;
  period_distinct_senders: number;
  group_titles: string[];
  representative: Representative;
  reverse_search_url?: string;
}

export interface CdfPoint {
  member_count: number;
  cumulative_fraction: number;
}

export interface WeekPoint {
  week: string;
  count: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
