/**
 * Ghost suggestion state machine, independent of the editor API.
 *
 * At most one ghost suggestion is visible. Every displayed suggestion sends
 * exactly one cc/received; accepting inserts the server text verbatim,
 * sends exactly one cc/accepted, and immediately requests the next line so
 * Tab can be pressed repeatedly for multi-line completions. Any edit that
 * is not our own acceptance insertion, and any cursor move off the anchor,
 * dismisses the ghost.
 */

import { InlineItem, Position } from "./lspClient";

export type { Position };

export interface GhostSuggestion {
    requestId: string;
    insertText: string;
    anchor: Position;
    shownAt: number;
}

export interface CompletionTransport {
    inlineCompletions(uri: string, position: Position): Promise<InlineItem[]>;
    ccReceived(requestId: string, clientTimestampMs: number): void;
    ccAccepted(requestId: string): void;
}

export interface EditorHost {
    showGhost(suggestion: GhostSuggestion): void;
    clearGhost(): void;
    /** Insert text at the anchor; resolves to the cursor position after it.
     *  Must deliver the resulting document-change event (and forward it to
     *  the language server) before resolving. */
    insertText(anchor: Position, text: string): Position | Promise<Position>;
    /** Native autocomplete popups take precedence over Tab-accept. */
    isNativePopupVisible(): boolean;
    now(): number;
}

function samePosition(a: Position, b: Position): boolean {
    return a.line === b.line && a.character === b.character;
}

export class SuggestionController {
    private ghost: GhostSuggestion | null = null;
    private ticket = 0;
    private selfEdit = false;

    constructor(
        private lsp: CompletionTransport,
        private host: EditorHost,
    ) {}

    get current(): GhostSuggestion | null {
        return this.ghost;
    }

    /** Ask the server for a completion; latest invocation wins. */
    async requestCompletion(uri: string, position: Position): Promise<void> {
        const ticket = ++this.ticket;
        let items: InlineItem[];
        try {
            items = await this.lsp.inlineCompletions(uri, position);
        } catch {
            return; // server trouble never surfaces in the editor
        }
        if (ticket !== this.ticket) {
            return; // a newer invocation superseded this one
        }
        if (!items.length || !items[0].insertText) {
            this.dismiss();
            return;
        }
        const item = items[0];
        this.lsp.ccReceived(item.requestId, this.host.now());
        this.ghost = {
            requestId: item.requestId,
            insertText: item.insertText,
            anchor: position,
            shownAt: this.host.now(),
        };
        this.host.showGhost(this.ghost);
    }

    /** Tab handler. False means: nothing accepted, let the editor have Tab. */
    async accept(uri: string): Promise<boolean> {
        if (!this.ghost || this.host.isNativePopupVisible()) {
            return false;
        }
        const ghost = this.ghost;
        this.ghost = null;
        this.host.clearGhost();
        // the explicit accept signal goes out before the edit it causes
        this.lsp.ccAccepted(ghost.requestId);
        this.selfEdit = true;
        let next: Position;
        try {
            next = await this.host.insertText(ghost.anchor, ghost.insertText);
        } finally {
            this.selfEdit = false;
        }
        await this.requestCompletion(uri, next);
        return true;
    }

    /** Escape handler; also used for passive invalidation. */
    dismiss(): void {
        if (this.ghost) {
            this.ghost = null;
            this.host.clearGhost();
        }
    }

    /** Document edits that are not our own insertion invalidate the ghost. */
    onTextChanged(): void {
        if (!this.selfEdit) {
            this.dismiss();
        }
    }

    onCursorMoved(position: Position): void {
        if (this.ghost && !samePosition(position, this.ghost.anchor)) {
            this.dismiss();
        }
    }
}

/** Cursor position after inserting text at an anchor. */
export function positionAfterInsert(anchor: Position, text: string): Position {
    const lines = text.split("\n");
    if (lines.length === 1) {
        return { line: anchor.line, character: anchor.character + text.length };
    }
    return {
        line: anchor.line + lines.length - 1,
        character: lines[lines.length - 1].length,
    };
}
