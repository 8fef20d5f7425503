"""Frozen Chebyshev/asymptotic tables for Fermi-Dirac integrals.

Generated by tools/gen_fermi_tables.py from 40-digit evaluations of the
defining integral; do not edit by hand. log F is fitted; derivative
arrays are exact Chebyshev derivatives of the fitted coefficients."""

import numpy as np

SERIES_CUT = -3.0
ASYMP_CUT = 100.0

F12_BOUNDS = np.array([-3.0, 4.0, 16.0, 48.0, 100.0])
F12_C0 = np.array([
    -0.24813777801861105, 2.4646014253295374, -0.33953197825751663, -0.020190312191828585,
    0.017446094183583986, 0.0010433088636860401, -0.0018349186890173643, -8.0546777899395204e-6,
    0.00023177212819340577, -1.5649586387094020e-5, -3.1285078192190893e-5,
    4.7003554556611402e-6, 4.3016405256982853e-6, -1.0673322510498159e-6,
    -5.8415049075148473e-7, 2.1807757715957670e-7, 7.5889987277063540e-8,
    -4.2040196341339017e-8, -8.9537018128967109e-9, 7.7835326685883086e-9,
    8.3620372591850810e-10, -1.3937782782781320e-9, -2.1611878993841341e-11,
    2.4181181253584508e-10, -1.7476465881335935e-11, -4.0571928515361184e-11,
    6.6416363884789149e-12, 6.5468899111905082e-12, -1.7542462430828314e-12,
    -1.0049428462525212e-12, 4.0187791803772951e-13, 1.4361348539269857e-13,
    -8.4894665487733458e-14, -1.8223722950719434e-14, 1.7040884370831401e-14,
    1.8155922674785845e-15, -3.8195129417046981e-15,
])
F12_D0 = np.array([
    0.68831151783949252, -0.35354471717488643, -0.031720635937893463, 0.034491829405132573,
    0.0028913278195269682, -0.0053849573002022530, -8.9554648147432136e-5,
    0.00090619249071442471, -5.7335936987674055e-5, -0.00015333723816971596,
    2.3147650145952332e-5, 2.5434637214232005e-5, -6.3974412896319782e-6,
    -4.0623263905562368e-6, 1.5313125753095113e-6, 6.1087753545564103e-7,
    -3.3792380034400332e-7, -8.2973776791797053e-8, 7.0466678400432846e-8,
    9.1214418551405451e-9, -1.4040247715668790e-8, -4.3517215535669036e-10,
    2.6850916236687940e-9, -1.6347996229125636e-10, -4.9300648394516990e-10,
    7.6197284081350754e-11, 8.6592494845704156e-11, -2.2478456547478838e-11,
    -1.4416663784092257e-11, 5.5894833418464647e-12, 2.2366748109495227e-12,
    -1.2998523959431841e-12, -3.0733550172113763e-13, 2.5250720154679915e-13,
    3.6311845349571690e-14, -7.8572837657925218e-14,
])
F12_C1 = np.array([
    3.0356223417133562, 0.97045361761345838, -0.15233165585290301, 0.030754046252627496,
    -0.0066747645369922957, 0.0014560800936748795, -0.00030493039872973795,
    5.8043825012377947e-5, -8.9416240481172262e-6, 6.1179282481295155e-7, 2.8964839852041155e-7,
    -1.8367083662639488e-7, 7.1090829333158901e-8, -2.2597612017137754e-8,
    6.2764653135027012e-9, -1.5312507015131355e-9, 3.1486078286665109e-10,
    -4.5859320694412705e-11, -5.7666237013080927e-13, 3.9297207084689608e-12,
    -2.0345922685991333e-12, 7.6518865536975426e-13, -2.4320893955589815e-13,
    6.7697179150901287e-14, -1.5950267316471476e-14,
])
F12_D1 = np.array([
    0.17840093865766464, -0.11108654760437321, 0.033317338110843150, -0.0095321103691045341,
    0.0025632918582156541, -0.00063242431978147323, 0.00013649170209085497,
    -2.2563522321997334e-5, 1.0561103953064239e-6, 1.2808084729819354e-6,
    -7.7926807913243080e-7, 3.1531381124723029e-7, -1.0580834483564957e-7,
    3.0950493914594691e-8, -7.8853594280526341e-9, 1.6603224515820850e-9,
    -2.2910592048695672e-10, -1.8935057040054103e-11, 3.0763563448048608e-11,
    -1.5475082819269247e-11, 5.8753322944118564e-12, -1.9111343619416916e-12,
    5.1901170682357653e-13, -1.2760213853177181e-13,
])
F12_C2 = np.array([
    4.8117723758710275, 0.80199081145737357, -0.10696634366242151, 0.018980516884784526,
    -0.0037804446064415738, 0.00080130217557436880, -0.00017649278879549164,
    3.9882960889185141e-5, -9.1755212078971961e-6, 2.1382418062280607e-6,
    -5.0293781971904910e-7, 1.1907970836921808e-7, -2.8320123135102540e-8,
    6.7529123378696227e-9, -1.6117604134458684e-9, 3.8443050372049693e-10,
    -9.1477839094307410e-11, 2.1677406829229349e-11, -5.1051113601241799e-12,
    1.1919984429408454e-12, -2.7515158846707960e-13, 6.2564929333427669e-14,
    -1.3947031095225176e-14, 3.0245500384758282e-15, -6.1093424022180802e-16,
])
F12_D2 = np.array([
    0.053952418857233542, -0.028774027499841000, 0.0076559862822953868, -0.0020324415842356227,
    0.00053829245050118959, -0.00014221928101483578, 3.7478590767209091e-5,
    -9.8496894182170498e-6, 2.5809999891720922e-6, -6.7416821031985374e-7,
    1.7547795716552388e-7, -4.5495935671042374e-8, 1.1743358157849026e-8,
    -3.0157509683885642e-9, 7.6987560881088949e-10, -1.9517024485829446e-10,
    4.9068414334957741e-11, -1.2214566669679638e-11, 3.0039248228453735e-12,
    -7.2806610940023365e-13, 1.7292852086086564e-13, -4.0187138232534659e-14,
    8.6955813606180061e-15, -1.8328027206654241e-15,
])
F12_C3 = np.array([
    6.1230933141946349, 0.54418795608567550, -0.049339816955093392, 0.0059625969014438156,
    -0.00081035613855627382, 0.00011743416265612526, -1.7721080327615631e-5,
    2.7495888783074417e-6, -4.3535775918416289e-7, 7.0001751122629230e-8,
    -1.1392251442336535e-8, 1.8720445185279298e-9, -3.1007444266089906e-10,
    5.1698623145237881e-11, -8.6676944211440091e-12, 1.4600937881643557e-12,
    -2.4695085533121863e-13, 4.1880883887723092e-14, -6.9279302122142799e-15,
])
F12_D3 = np.array([
    0.021641646770322347, -0.0078485373520986476, 0.0014226815340542704,
    -0.00025779628208427969, 4.6697633721082200e-5, -8.4559317592723624e-6,
    1.5306480841109461e-6, -2.7697160806514803e-7, 5.0100226560785149e-8,
    -9.0591408748939442e-9, 1.6374757835802982e-9, -2.9587053463507109e-10,
    5.3438114056665314e-11, -9.6479721788565756e-12, 1.7394909114274329e-12,
    -3.1353203300918116e-13, 5.4767309699330197e-14, -9.5925187553736184e-15,
])
F12_NPIECE = 4
F12_ASYM_LOGA = -0.28468287047291916
F12_ASYM_C = np.array([
    1.2337005501673975, 1.0654097612720941, 9.7445060407793276,
])

F32_BOUNDS = np.array([-3.0, 4.0, 16.0, 48.0, 100.0])
F32_C0 = np.array([
    0.028788649652255429, 2.8257458587187878, -0.24906766066658953, -0.031125351140642327,
    0.0090721481740521774, 0.0023128881241848421, -0.00082885564942995926,
    -0.00021726878495659553, 0.00010035048466199592, 2.2071391004621474e-5,
    -1.3730409988965497e-5, -2.2234226379665758e-6, 1.9959113239640443e-6,
    1.9871575956696004e-7, -2.9914365599072646e-7, -1.0707202293478716e-8,
    4.5435777504905898e-8, -1.3501512656336380e-9, -6.9118454975905027e-9,
    6.8410922301869158e-10, 1.0430350319657573e-9, -1.8303503925672526e-10,
    -1.5464248470864467e-10, 4.0980224223822529e-11, 2.2259052125976309e-11,
    -8.4108935237746304e-12, -3.0550238887857747e-12, 1.6354256144498427e-12,
    3.8671395900227287e-13, -3.0570376152107674e-13, -4.1661839276309313e-14,
    5.5313113429435240e-14, 2.7430280482221112e-15, -9.7077178600745698e-15,
    3.1796174887209139e-16, 1.6123016733811422e-15, -2.4183989609134115e-16,
])
F32_D0 = np.array([
    0.78359713113163867, -0.26636227391382763, -0.047517657004601389, 0.018286481133703262,
    0.0058400878079283155, -0.0024498575498445716, -0.00076816397545694764,
    0.00039193324820100303, 0.00010091116436943450, -6.6811824539549756e-5,
    -1.2598846511475941e-5, 1.1647661111681658e-5, 1.3769529271711068e-6,
    -2.0385879669289318e-6, -9.9221286754882057e-8, 3.5456128099687989e-7,
    -7.4452670964930583e-9, -6.0851541905116893e-8, 5.6704880553765685e-9,
    1.0241726070099705e-8, -1.7569835088263687e-9, -1.6786742952232353e-9,
    4.3943696225433446e-10, 2.6540265539972635e-10, -9.9160270401618778e-11,
    -3.9864345185091606e-11, 2.0995351366590228e-11, 5.5245811625827608e-12,
    -4.2369295420644879e-12, -6.6284218145360515e-13, 8.2901850599906950e-13,
    5.1360777568840219e-14, -1.5081378903664047e-13, 1.2025504013501863e-15,
    3.2246033467622845e-14, -4.9749921481647322e-15,
])
F32_C1 = np.array([
    4.3996345516982283, 1.5437457481077577, -0.22263967803376174, 0.039736478966567471,
    -0.0072859014706454499, 0.0012544303766770320, -0.00017926637681072023,
    1.2554742433625550e-5, 4.3169778863156857e-6, -2.6676507413767349e-6, 9.5904986558668913e-7,
    -2.7790710943105535e-7, 6.8621425417820324e-8, -1.4143159449414661e-8,
    2.1076356201619604e-9, -2.9619694566392482e-11, -1.3884487053159678e-10,
    7.2057377743805799e-11, -2.6098382323986840e-11, 7.8377792069255295e-12,
    -2.0167394342896234e-12, 4.3233508176515284e-13, -6.6309735597098182e-14,
    4.4894779604631710e-16, 5.0180470797520929e-15, -2.6619201383709594e-15,
    9.9513265343388569e-16, -3.0938189977411373e-16, 8.2750379987076358e-17,
    -1.8705301130926038e-17, 3.2930685471490349e-18,
])
F32_D1 = np.array([
    0.27821466188842391, -0.15848452788605107, 0.041847407740928568, -0.010058075863543241,
    0.0021109287743610970, -0.00034354056934930790, 2.0211479899377022e-5,
    1.4992184272132555e-5, -9.0829191124159284e-6, 3.4802432419573927e-6,
    -1.0799668882857237e-6, 2.8341035666842890e-7, -6.0974153705187437e-8,
    8.9246549971476015e-9, 3.1287057560942924e-10, -9.1097789694154694e-10,
    4.6096904844139165e-10, -1.7047192077303079e-10, 5.2643907893158788e-11,
    -1.3881626829109748e-11, 3.0046395826304343e-12, -4.3669726717892538e-13,
    -2.1705989725635539e-14, 4.9574127199794622e-14, -2.5147922828657304e-14,
    9.4297505617778790e-15, -2.9652550088993086e-15, 8.0526756535086969e-16,
    -1.8081791093228504e-16, 3.2930685471490349e-17,
])
F32_C2 = np.array([
    7.2992256463136119, 1.3305853829637006, -0.17592030976123961, 0.030812481628652846,
    -0.0060315209080776253, 0.0012508299136766235, -0.00026829326636005161,
    5.8747965755489866e-5, -1.3026917229256051e-5, 2.9090423073497038e-6,
    -6.5147848380921619e-7, 1.4580718867591572e-7, -3.2508350724334862e-8,
    7.1966517527304931e-9, -1.5761243926208518e-9, 3.3994002279955942e-10,
    -7.1762031948964350e-11, 1.4692593012714248e-11, -2.8737836658856675e-12,
    5.2179740934184404e-13, -8.2199098335576803e-14, 8.7657471244578609e-15,
    6.6530633155237742e-16, -8.4311595986007316e-16, 3.3577287528337311e-16,
])
F32_D2 = np.array([
    0.089357256084599896, -0.047210950780389283, 0.012391339298737214, -0.0032308733400793805,
    0.00083665868799239719, -0.00021511288604056785, 5.4889991944507497e-5,
    -1.3892936270529141e-5, 3.4855219084538641e-6, -8.6601904127309000e-7,
    2.1284931268544736e-7, -5.1670936511569756e-8, 1.2364428256063247e-8,
    -2.9084104250674634e-9, 6.6986915787619568e-10, -1.5019273798097277e-10,
    3.2481615127021761e-11, -6.6686740830440747e-12, 1.2598549750039838e-12,
    -2.0266083480132285e-13, 2.0586127817104175e-14, 2.8369110376191572e-15,
    -2.4239583845977103e-15, 1.0073186258501193e-15,
])
F32_C3 = np.array([
    9.4795671164064475, 0.90633852922498359, -0.082060617647102655, 0.0098962555237065179,
    -0.0013412538400019440, 0.00019369965403775172, -2.9108604885360840e-5,
    4.4945927853548832e-6, -7.0770346520758911e-7, 1.1307933236048666e-7,
    -1.8274063866450456e-8, 2.9796776738372247e-9, -4.8934647937996613e-10,
    8.0833130386182695e-11, -1.3416161006175955e-11, 2.2354492419552053e-12,
    -3.7367122239363587e-13, 6.2579636050827581e-14, -1.0221426933852244e-14,
])
F32_D3 = np.array([
    0.036039550299679282, -0.013051288670617870, 0.0023607521974367493, -0.00042657826337130754,
    7.7000922735245142e-5, -1.3884774139940165e-5, 2.5010557976483257e-6,
    -4.5003342361977743e-7, 8.0890451688004000e-8, -1.4523598876645671e-8,
    2.6047600538209260e-9, -4.6662667168378188e-10, 8.3494329804812860e-11,
    -1.4922229179197761e-11, 2.6611994186301652e-12, -4.7405578793134725e-13,
    8.1834908681851452e-14, -1.4152744985333876e-14,
])
F32_NPIECE = 4
F32_ASYM_LOGA = -1.2009736023470742
F32_ASYM_C = np.array([
    6.1685027506666875, -1.7756855701709189, -6.9491636252558713,
])

F12_ZERO = 0.76514702462540795
F32_ZERO = 0.86719988901218414
