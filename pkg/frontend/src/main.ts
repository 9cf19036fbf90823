import { ApiClient } from "./api.js";
import { CampaignController } from "./controller.js";
import { render, wire } from "./ui.js";

const controller = new CampaignController(new ApiClient(""), render);
wire(controller);
render(controller.view);
