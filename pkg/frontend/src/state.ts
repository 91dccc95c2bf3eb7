import type { Period } from "./period";
import { samePeriod } from "./period";
import type { MediaKind, RankedEntry } from "./types";

/**
 * What the dashboard is currently showing. Mutations go through methods so
 * two rules always hold: a detail panel only opens for a cluster present in
 * the current result list, and results from a superseded request are
 * dropped by sequence number instead of clobbering newer ones.
 */
export class ViewState {
  period: Period | null = null;
  kind: MediaKind = "image";
  results: RankedEntry[] = [];
  selectedCluster: string | null = null;
  gridScroll = 0;

  private sequence = 0;
  private applied = 0;

  /** Marks the start of a grid request; pass the number to applyResults. */
  beginRequest(period: Period, kind: MediaKind): number {
    this.period = period;
    this.kind = kind;
    if (this.selectedCluster !== null) this.selectedCluster = null;
    return ++this.sequence;
  }

  /** Accepts a response only if nothing newer was requested or applied. */
  applyResults(requestId: number, entries: RankedEntry[]): boolean {
    if (requestId !== this.sequence || requestId <= this.applied) {
      return false;
    }
    this.applied = requestId;
    this.results = entries;
    return true;
  }

  /** Switching tabs keeps the selected period. */
  switchKind(kind: MediaKind): Period | null {
    this.kind = kind;
    return this.period;
  }

  openDetail(clusterId: string, scrollTop: number): boolean {
    if (!this.results.some((e) => e.cluster_id === clusterId)) {
      return false;
    }
    this.gridScroll = scrollTop;
    this.selectedCluster = clusterId;
    return true;
  }

  /** Returns the scroll offset to restore. */
  closeDetail(): number {
    this.selectedCluster = null;
    return this.gridScroll;
  }

  isCurrent(period: Period, kind: MediaKind): boolean {
    return samePeriod(this.period, period) && this.kind === kind;
  }
}
