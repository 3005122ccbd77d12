/** Typed wrapper over the ghostwriter language server protocol surface. */

import { JsonRpcConnection } from "./protocol";

export interface Position {
    line: number;
    character: number;
}

export interface Range {
    start: Position;
    end: Position;
}

export interface InlineItem {
    insertText: string;
    range: Range;
    requestId: string;
}

export interface ContentChange {
    range?: Range;
    text: string;
}

export class GwLspClient {
    constructor(private rpc: JsonRpcConnection) {}

    async initialize(): Promise<any> {
        const result = await this.rpc.request("initialize", {});
        this.rpc.notify("initialized", {});
        return result;
    }

    didOpen(uri: string, languageId: string, version: number, text: string): void {
        this.rpc.notify("textDocument/didOpen", {
            textDocument: { uri, languageId, version, text },
        });
    }

    didChange(uri: string, version: number, changes: ContentChange[]): void {
        this.rpc.notify("textDocument/didChange", {
            textDocument: { uri, version },
            contentChanges: changes,
        });
    }

    async inlineCompletions(uri: string, position: Position): Promise<InlineItem[]> {
        const result = await this.rpc.request("textDocument/inlineCompletions", {
            textDocument: { uri },
            position,
        });
        return result?.items ?? [];
    }

    ccReceived(requestId: string, clientTimestampMs: number): void {
        this.rpc.notify("cc/received", { requestId, clientTimestampMs });
    }

    ccAccepted(requestId: string): void {
        this.rpc.notify("cc/accepted", { requestId });
    }

    async shutdown(): Promise<void> {
        await this.rpc.request("shutdown", null);
        this.rpc.notify("exit", null);
    }
}
