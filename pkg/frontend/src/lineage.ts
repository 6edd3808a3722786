// Ancestry helpers for the elite detail panel.

import type { IndividualDetail, LineageNode } from "./api.js";

/**
 * Ancestors grouped by distance from the subject: level 0 is the
 * individual itself, level 1 its parents, level 2 their parents, and so
 * on. A shared ancestor appears once, at its shortest distance.
 */
export function ancestryLevels(detail: IndividualDetail): LineageNode[][] {
  const byId = new Map(detail.lineage.map((node) => [node.individual_id, node]));
  const subject = byId.get(detail.id);
  if (!subject) return [];

  const seen = new Set<number>([detail.id]);
  const levels: LineageNode[][] = [];
  let frontier: LineageNode[] = [subject];
  while (frontier.length > 0) {
    levels.push(frontier);
    const next: LineageNode[] = [];
    for (const node of frontier) {
      for (const parentId of node.parents) {
        if (seen.has(parentId)) continue;
        seen.add(parentId);
        const parent = byId.get(parentId);
        if (parent) next.push(parent);
      }
    }
    frontier = next;
  }
  return levels;
}

/** True when a genome's text form is a rectangular character grid. */
export function isGridText(text: string): boolean {
  const lines = text.replace(/\n+$/, "").split("\n");
  if (lines.length < 2) return false;
  return lines.every((line) => line.length === lines[0].length && line.length > 0);
}
