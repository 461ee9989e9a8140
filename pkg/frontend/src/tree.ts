/**
 * Collapsible view-model over the hierarchy export.
 *
 * Rows are derived from the export JSON on every call; the only state the
 * view owns is which nodes are expanded, which node's members are shown,
 * and which concept ids are highlighted. Node size scales with the total
 * membership weight, log-compressed so near-duplicate members (whose
 * membership degree explodes) do not dwarf every other node.
 */
import type { HierarchyExport, HierarchyMember } from "./api";

export interface TreeRow {
  key: string;
  label: string;
  level: number;
  depth: number;
  hasChildren: boolean;
  expanded: boolean;
  /** Relative size in [1, 2] for rendering. */
  size: number;
  highlighted: boolean;
  selected: boolean;
  members: HierarchyMember[];
}

function weight(node: HierarchyExport): number {
  return node.members.reduce((acc, m) => acc + m.membership, 0);
}

function collectWeights(node: HierarchyExport, out: number[]): void {
  out.push(Math.log1p(weight(node)));
  for (const child of node.children) {
    collectWeights(child, out);
  }
}

export class TreeView {
  private readonly expanded = new Set<string>(["0"]);
  private selectedKey: string | null = null;
  private highlightIds = new Set<number>();
  private readonly minWeight: number;
  private readonly maxWeight: number;

  constructor(private readonly root: HierarchyExport) {
    const weights: number[] = [];
    collectWeights(root, weights);
    this.minWeight = Math.min(...weights);
    this.maxWeight = Math.max(...weights);
  }

  /** Expand or collapse a node; leaves are left alone. */
  toggle(key: string): void {
    const node = this.find(key);
    if (!node || node.children.length === 0) {
      return;
    }
    if (this.expanded.has(key)) {
      this.expanded.delete(key);
    } else {
      this.expanded.add(key);
    }
  }

  /** Mark a node as the one whose members are shown; toggles off. */
  select(key: string): void {
    this.selectedKey = this.selectedKey === key ? null : key;
  }

  setHighlight(ids: Iterable<number>): void {
    this.highlightIds = new Set(ids);
  }

  /** Visible rows in pre-order; children appear only under expanded nodes. */
  rows(): TreeRow[] {
    const out: TreeRow[] = [];
    this.walk(this.root, "0", 0, out);
    return out;
  }

  selectedMembers(): { label: string; members: HierarchyMember[] } | null {
    if (this.selectedKey === null) {
      return null;
    }
    const node = this.find(this.selectedKey);
    return node ? { label: node.label, members: node.members } : null;
  }

  private walk(
    node: HierarchyExport,
    key: string,
    depth: number,
    out: TreeRow[],
  ): void {
    out.push({
      key,
      label: node.label,
      level: node.level,
      depth,
      hasChildren: node.children.length > 0,
      expanded: this.expanded.has(key),
      size: this.sizeOf(node),
      highlighted: this.highlightIds.has(node.label_id),
      selected: this.selectedKey === key,
      members: node.members,
    });
    if (!this.expanded.has(key)) {
      return;
    }
    node.children.forEach((child, i) => {
      this.walk(child, `${key}.${i}`, depth + 1, out);
    });
  }

  private sizeOf(node: HierarchyExport): number {
    const span = this.maxWeight - this.minWeight;
    if (span <= 0) {
      return 1;
    }
    return 1 + (Math.log1p(weight(node)) - this.minWeight) / span;
  }

  private find(key: string): HierarchyExport | null {
    let node = this.root;
    const parts = key.split(".");
    if (parts[0] !== "0") {
      return null;
    }
    for (const part of parts.slice(1)) {
      const child = node.children[Number(part)];
      if (!child) {
        return null;
      }
      node = child;
    }
    return node;
  }
}
